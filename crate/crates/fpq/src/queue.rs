//! Exact simulation of the finite-pool queue embedded at service completions.
//!
//! A pool of `n` customers has i.i.d. service requirements `S_i`; customer `i`
//! joins after an exponential time with rate `λ S_i^α`. The `Q_n(0)` initial
//! customers are the first arrivals (they joined before time zero), so their
//! service requirements follow the α-size-biased law, and the remaining pool
//! clocks restart at zero by memorylessness. The embedded chain records, at
//! the k-th service completion,
//!
//! ```text
//! Q_n(k) = max(Q_n(k-1) + A_n(k) - 1, 0),      N_n(k) = N_n(k-1) + A_n(k) - 1,
//! ```
//!
//! with `A_n(k)` the number of pool customers whose (memoryless) clocks fire
//! during the k-th service. Service order is arrival order; when the queue
//! empties the next customer is the α-size-biased pick from the pool, which
//! by memorylessness is exactly the next clock to fire.
//!
//! Two simulators are provided and kept permanently: the per-step Bernoulli
//! chain ([`ChainState`]), which follows the definition clock by clock, and a
//! sorted-arrival timeline ([`simulate_first_busy_period_fast`]) that is equal
//! in law and O(n log n) per replication. The slow one is the oracle for the
//! fast one; the test suite compares their busy-period laws.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::dist::{DistError, ServiceDistribution};
use crate::math;
use crate::rng::Stream;

/// How the arrival-rate parameter λ is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "mode", rename_all = "lowercase"))]
pub enum LambdaMode {
    /// λ = 1/E[S^{1+α}], placing the system in the critical window
    /// ρ_n = 1 + βn^{-1/3}. Service times are scaled to S_i(1+βn^{-1/3})/n
    /// and the initial queue holds ⌊q·n^{1/3}⌋ customers.
    Analytic,
    /// Fixed λ; the nonscaled queue. Service times are the raw S_i and the
    /// initial queue holds ⌊q⌋ customers.
    Fixed { lambda: f64 },
}

/// Configuration for one queue realization.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QueueConfig {
    /// Pool size: total number of customers (the initial customers are the
    /// earliest arrivals among these).
    pub n: usize,
    /// Arrival-rate exponent, in [0, 1].
    pub alpha: f64,
    /// Criticality offset β (used in analytic mode).
    pub beta: f64,
    /// Initial scaled queue length q >= 0.
    pub q: f64,
    pub dist: ServiceDistribution,
    pub lambda_mode: LambdaMode,
}

#[derive(Clone, Debug, PartialEq)]
pub enum QueueError {
    InvalidConfig(&'static str),
    Dist(DistError),
}

impl core::fmt::Display for QueueError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            QueueError::InvalidConfig(what) => write!(f, "invalid queue config: {what}"),
            QueueError::Dist(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for QueueError {}

impl From<DistError> for QueueError {
    fn from(e: DistError) -> Self {
        QueueError::Dist(e)
    }
}

/// Signals from the chain: not failures, but states the caller must resolve.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChainSignal {
    /// The queue is empty; call [`ChainState::idle_pick`] before stepping.
    QueueEmpty,
    /// Queue and pool are both exhausted; the simulation is complete.
    PoolExhausted,
}

impl QueueConfig {
    pub fn validate(&self) -> Result<(), QueueError> {
        self.dist.validate()?;
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(QueueError::InvalidConfig("alpha must lie in [0, 1]"));
        }
        if !(self.q >= 0.0) || !self.q.is_finite() {
            return Err(QueueError::InvalidConfig("q must be >= 0"));
        }
        if let LambdaMode::Fixed { lambda } = self.lambda_mode {
            if !(lambda > 0.0) || !lambda.is_finite() {
                return Err(QueueError::InvalidConfig("fixed lambda must be > 0"));
            }
        }
        if self.initial_queue_len() > self.n && self.n > 0 {
            return Err(QueueError::InvalidConfig("initial queue exceeds pool size"));
        }
        Ok(())
    }

    /// The arrival rate λ for this configuration.
    pub fn lambda(&self) -> Result<f64, QueueError> {
        match self.lambda_mode {
            LambdaMode::Fixed { lambda } => Ok(lambda),
            LambdaMode::Analytic => Ok(1.0 / self.dist.moment(1.0 + self.alpha)?),
        }
    }

    /// Service-speed factor c_{n,β} = 1 + βn^{-1/3} (1 in fixed mode).
    pub fn speed_factor(&self) -> f64 {
        match self.lambda_mode {
            LambdaMode::Analytic => 1.0 + self.beta * math::powf(self.n as f64, -1.0 / 3.0),
            LambdaMode::Fixed { .. } => 1.0,
        }
    }

    /// Q_n(0): ⌊q·n^{1/3}⌋ in analytic mode, ⌊q⌋ in fixed mode or when the
    /// pool is empty. The floor is taken on the f64 cube root (so n = 1000
    /// yields 9, matching the reference finite-n tables).
    pub fn initial_queue_len(&self) -> usize {
        let raw = match self.lambda_mode {
            LambdaMode::Analytic if self.n > 0 => {
                self.q * math::powf(self.n as f64, 1.0 / 3.0)
            }
            _ => self.q,
        };
        math::floor(raw) as usize
    }

    /// Multiplier mapping a service requirement to a service time.
    fn time_scale(&self) -> f64 {
        match self.lambda_mode {
            LambdaMode::Analytic => self.speed_factor() / self.n as f64,
            LambdaMode::Fixed { .. } => 1.0,
        }
    }
}

/// One sampled pool: service requirements and derived arrival parameters.
#[derive(Clone, Debug)]
pub struct Population {
    /// Service requirements S_i, length n.
    pub services: Vec<f64>,
    /// Arrival weights S_i^α.
    pub alpha_weights: Vec<f64>,
    /// Arrival rate λ.
    pub lambda: f64,
    /// Speed factor c_{n,β}.
    pub speed_factor: f64,
    /// Service times: services[i] * speed_factor / n (raw services in fixed mode).
    pub scaled_services: Vec<f64>,
    /// Q_n(0).
    pub initial_queue: usize,
    alpha: f64,
}

/// Sample a population for the given configuration.
pub fn build_population(config: &QueueConfig, rng: &mut Stream) -> Result<Population, QueueError> {
    config.validate()?;
    let services = config.dist.sample(config.n, rng);
    let lambda = config.lambda()?;
    let time_scale = config.time_scale();
    let alpha_weights = services
        .iter()
        .map(|&s| math::powf(s, config.alpha))
        .collect::<Vec<_>>();
    let scaled_services = services.iter().map(|&s| s * time_scale).collect();
    Ok(Population {
        services,
        alpha_weights,
        lambda,
        speed_factor: config.speed_factor(),
        scaled_services,
        initial_queue: config.initial_queue_len(),
        alpha: config.alpha,
    })
}

/// Size-biased pick: index j with probability weights[j] / Σ weights.
pub fn size_biased_pick(weights: &[f64], rng: &mut Stream) -> usize {
    debug_assert!(!weights.is_empty());
    let total: f64 = weights.iter().sum();
    let mut target = rng.uniform() * total;
    for (i, &w) in weights.iter().enumerate() {
        target -= w;
        if target < 0.0 {
            return i;
        }
    }
    weights.len() - 1
}

/// Exact Binomial(m, p) sampler by geometric skipping; O(mp) expected draws.
fn binomial(m: usize, p: f64, rng: &mut Stream) -> usize {
    if p <= 0.0 || m == 0 {
        return 0;
    }
    if p >= 1.0 {
        return m;
    }
    let log_q = math::ln_1p(-p);
    let mut count = 0usize;
    let mut pos = 0usize;
    loop {
        let skip = math::floor(math::ln(rng.uniform_open()) / log_q) as usize;
        pos = match pos.checked_add(skip).and_then(|v| v.checked_add(1)) {
            Some(v) => v,
            None => return count,
        };
        if pos > m {
            return count;
        }
        count += 1;
    }
}

/// Trajectory of the embedded chain with busy-period boundaries and the
/// forest structure of the first busy period.
#[derive(Clone, Debug)]
pub struct EmbeddedPath {
    /// A_n(k) for k = 1..=K.
    pub arrivals: Vec<u32>,
    /// N_n(k) for k = 0..=K.
    pub unreflected: Vec<i64>,
    /// Q_n(k) for k = 0..=K.
    pub queue: Vec<u64>,
    /// Customer served at step k (index into the population), k = 1..=K.
    pub served_order: Vec<u32>,
    /// Steps k >= 1 with Q_n(k) = 0.
    pub busy_period_ends: Vec<u64>,
    /// parent[j] = customer during whose service j arrived; None for the
    /// initial customers and for customers entering service from an idle
    /// period (the roots of the forest).
    pub parent: Vec<Option<u32>>,
}

impl EmbeddedPath {
    /// Number of services recorded.
    pub fn len(&self) -> usize {
        self.served_order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.served_order.is_empty()
    }

    /// Customers served in the first busy period, if it completed in horizon.
    pub fn first_busy_period(&self) -> Option<u64> {
        self.busy_period_ends.first().copied()
    }
}

/// Number of customers served in the first busy period.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BusyPeriodRecord {
    pub customers_served: u64,
    pub initial_queue: u64,
    /// customers_served / n^{2/3}.
    pub scaled_value: f64,
}

/// Mutable state of the per-step embedded chain.
///
/// The chain tracks the pool of not-yet-arrived customers and the FIFO queue
/// of arrived-unserved ones. `Q`/`N` follow their defining recursions.
pub struct ChainState {
    lambda: f64,
    alpha_is_zero: bool,
    /// ids of not-yet-arrived customers
    pool: Vec<u32>,
    /// arrived, not yet served (FIFO)
    queue: VecDeque<u32>,
    services_scaled: Vec<f64>,
    weights: Vec<f64>,
    parent: Vec<Option<u32>>,
    served: Vec<u32>,
    steps: u64,
    q_reflected: u64,
    n_unreflected: i64,
}

/// Result of one service step.
#[derive(Clone, Copy, Debug)]
pub struct Step {
    pub served: u32,
    pub arrivals: u32,
    pub queue_after: u64,
}

impl ChainState {
    /// Initialize from a population: the Q_n(0) initial customers are the
    /// first arrivals, drawn sequentially size-biased without replacement.
    pub fn new(pop: &Population, rng: &mut Stream) -> ChainState {
        let n = pop.services.len();
        let mut pool: Vec<u32> = (0..n as u32).collect();
        let mut queue = VecDeque::with_capacity(pop.initial_queue.max(8));
        let mut scratch_weights: Vec<f64> = pop.alpha_weights.clone();
        for _ in 0..pop.initial_queue.min(n) {
            let pos = size_biased_pick(&scratch_weights, rng);
            queue.push_back(pool[pos]);
            pool.swap_remove(pos);
            scratch_weights.swap_remove(pos);
        }
        let q0 = pop.initial_queue as u64;
        ChainState {
            lambda: pop.lambda,
            alpha_is_zero: pop.alpha == 0.0,
            pool,
            queue,
            services_scaled: pop.scaled_services.clone(),
            weights: pop.alpha_weights.clone(),
            parent: vec![None; n],
            served: Vec::new(),
            steps: 0,
            q_reflected: q0,
            n_unreflected: q0 as i64,
        }
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn queue_len(&self) -> usize {
        self.queue.len()
    }

    pub fn pool_len(&self) -> usize {
        self.pool.len()
    }

    pub fn served_count(&self) -> usize {
        self.served.len()
    }

    /// Q_n at the last completed step.
    pub fn q_value(&self) -> u64 {
        self.q_reflected
    }

    /// N_n at the last completed step.
    pub fn n_value(&self) -> i64 {
        self.n_unreflected
    }

    /// Serve the head of the queue, drawing the arrivals during its service.
    ///
    /// Joiners enter the queue ordered by their arrival instants within the
    /// service (truncated-exponential draws), and their parent link is set to
    /// the served customer.
    pub fn step_embedded(&mut self, rng: &mut Stream) -> Result<Step, ChainSignal> {
        let served = self.queue.pop_front().ok_or(ChainSignal::QueueEmpty)?;
        let service_time = self.services_scaled[served as usize];
        let joiners = self.draw_arrivals(service_time, rng);
        let arrivals = joiners.len() as u32;
        for &(id, _) in &joiners {
            self.parent[id as usize] = Some(served);
            self.queue.push_back(id);
        }
        self.advance(served, arrivals);
        Ok(Step {
            served,
            arrivals,
            queue_after: self.q_reflected,
        })
    }

    /// With the queue empty, pull the next customer from the pool with
    /// probability proportional to S^α and place it at the head of the queue
    /// (it is served by the next `step_embedded`). Returns its id; the
    /// customer is a root of the forest.
    pub fn idle_pick(&mut self, rng: &mut Stream) -> Result<u32, ChainSignal> {
        debug_assert!(self.queue.is_empty());
        if self.pool.is_empty() {
            return Err(ChainSignal::PoolExhausted);
        }
        // O(|pool|) linear scan against the current weight total
        let total: f64 = self.pool.iter().map(|&id| self.weights[id as usize]).sum();
        let mut target = rng.uniform() * total;
        let mut pos = self.pool.len() - 1;
        for (i, &id) in self.pool.iter().enumerate() {
            target -= self.weights[id as usize];
            if target < 0.0 {
                pos = i;
                break;
            }
        }
        let id = self.pool.swap_remove(pos);
        self.queue.push_front(id);
        Ok(id)
    }

    fn advance(&mut self, served: u32, arrivals: u32) {
        self.served.push(served);
        self.steps += 1;
        let delta = arrivals as i64 - 1;
        self.n_unreflected += delta;
        self.q_reflected = (self.q_reflected as i64 + delta).max(0) as u64;
    }

    /// Draw the joiners for one service of the given length: ids paired with
    /// arrival instants, sorted by instant, removed from the pool.
    fn draw_arrivals(&mut self, service_time: f64, rng: &mut Stream) -> Vec<(u32, f64)> {
        let mut joiners: Vec<(u32, f64)> = Vec::new();
        if self.pool.is_empty() || service_time <= 0.0 {
            return joiners;
        }
        if self.alpha_is_zero {
            // all weights are 1: the joiner count is Binomial and the set of
            // joiners a uniform subset
            let p = -math::expm1(-self.lambda * service_time);
            let count = binomial(self.pool.len(), p, rng);
            for picked in 0..count {
                let j = picked + rng.below(self.pool.len() - picked);
                self.pool.swap(picked, j);
            }
            for slot in (0..count).rev() {
                let id = self.pool.swap_remove(slot);
                // arrival instant: exponential conditioned on <= service_time
                let u = rng.uniform();
                let instant = -math::ln_1p(-u * p) / self.lambda;
                joiners.push((id, instant));
            }
        } else {
            let mut idx = 0;
            while idx < self.pool.len() {
                let id = self.pool[idx];
                let clock = rng.exponential(self.lambda * self.weights[id as usize]);
                if clock <= service_time {
                    joiners.push((id, clock));
                    self.pool.swap_remove(idx);
                } else {
                    idx += 1;
                }
            }
        }
        joiners.sort_unstable_by(|a, b| a.1.total_cmp(&b.1));
        joiners
    }
}

/// Run the embedded chain for up to `horizon_steps` services (or until pool
/// and queue are exhausted), recording the full path.
pub fn simulate_path(
    config: &QueueConfig,
    horizon_steps: u64,
    rng: &mut Stream,
) -> Result<EmbeddedPath, QueueError> {
    config.validate()?;
    if config.n == 0 {
        return Ok(countdown_path(config.initial_queue_len() as u64));
    }
    let pop = build_population(config, rng)?;
    let mut chain = ChainState::new(&pop, rng);
    let mut path = EmbeddedPath {
        arrivals: Vec::new(),
        unreflected: vec![chain.n_value()],
        queue: vec![chain.q_value()],
        served_order: Vec::new(),
        busy_period_ends: Vec::new(),
        parent: Vec::new(),
    };
    while chain.steps() < horizon_steps {
        if chain.queue_len() == 0 && chain.idle_pick(rng).is_err() {
            break;
        }
        let step = chain.step_embedded(rng).expect("queue nonempty");
        path.arrivals.push(step.arrivals);
        path.unreflected.push(chain.n_value());
        path.queue.push(chain.q_value());
        path.served_order.push(step.served);
        if step.queue_after == 0 {
            path.busy_period_ends.push(chain.steps());
        }
    }
    path.parent = chain.parent;
    Ok(path)
}

/// Degenerate path with an empty pool: the queue drains one per step.
fn countdown_path(q0: u64) -> EmbeddedPath {
    let mut path = EmbeddedPath {
        arrivals: vec![0; q0 as usize],
        unreflected: Vec::with_capacity(q0 as usize + 1),
        queue: Vec::with_capacity(q0 as usize + 1),
        served_order: Vec::new(),
        busy_period_ends: Vec::new(),
        parent: Vec::new(),
    };
    for k in 0..=q0 {
        path.unreflected.push((q0 - k) as i64);
        path.queue.push(q0 - k);
    }
    if q0 > 0 {
        path.busy_period_ends.push(q0);
    }
    path
}

/// Busy period of the per-step chain (oracle path; O(n) per step).
pub fn simulate_first_busy_period_slow(
    config: &QueueConfig,
    rng: &mut Stream,
) -> Result<BusyPeriodRecord, QueueError> {
    config.validate()?;
    let q0 = config.initial_queue_len() as u64;
    if q0 == 0 {
        return Err(QueueError::InvalidConfig("busy period needs Q_n(0) >= 1"));
    }
    if config.n == 0 {
        return Ok(record(config, q0, q0));
    }
    let pop = build_population(config, rng)?;
    let mut chain = ChainState::new(&pop, rng);
    loop {
        let step = chain.step_embedded(rng).expect("first busy period");
        if step.queue_after == 0 {
            return Ok(record(config, chain.steps(), q0));
        }
    }
}

/// Busy period by the sorted-arrival timeline, equal in law to the per-step
/// chain and O(n log n) per replication.
///
/// All arrival clocks are drawn up front; the first Q_n(0) customers in clock
/// order are the initial queue, the rest arrive when the cumulative service
/// time passes their clock residual. The walk q0 + (arrived) - (served) hits
/// zero exactly at the end of the first busy period.
pub fn simulate_first_busy_period_fast(
    config: &QueueConfig,
    rng: &mut Stream,
) -> Result<BusyPeriodRecord, QueueError> {
    config.validate()?;
    let q0 = config.initial_queue_len();
    if q0 == 0 {
        return Err(QueueError::InvalidConfig("busy period needs Q_n(0) >= 1"));
    }
    if config.n == 0 {
        return Ok(record(config, q0 as u64, q0 as u64));
    }
    let pop = build_population(config, rng)?;
    let n = config.n;
    let mut order: Vec<(f64, f64)> = Vec::with_capacity(n); // (clock, scaled service)
    for i in 0..n {
        let clock = rng.exponential(pop.lambda * pop.alpha_weights[i]);
        order.push((clock, pop.scaled_services[i]));
    }
    order.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
    // pool clocks restart at time zero: residual of the m-th arrival is
    // T_(m) - T_(q0)
    let t_shift = order[q0 - 1].0;
    let mut work = 0.0;
    let mut next_arrival = q0;
    for k in 1..=n {
        work += order[k - 1].1;
        while next_arrival < n && order[next_arrival].0 - t_shift <= work {
            next_arrival += 1;
        }
        let walk = q0 as i64 + (next_arrival - q0) as i64 - k as i64;
        if walk <= 0 {
            return Ok(record(config, k as u64, q0 as u64));
        }
    }
    // the walk always reaches zero by step n
    Ok(record(config, n as u64, q0 as u64))
}

fn record(config: &QueueConfig, bp: u64, q0: u64) -> BusyPeriodRecord {
    let scale = if config.n > 0 {
        math::powf(config.n as f64, 2.0 / 3.0)
    } else {
        1.0
    };
    BusyPeriodRecord {
        customers_served: bp,
        initial_queue: q0,
        scaled_value: bp as f64 / scale,
    }
}

/// Jointly simulate the chain and its upper-bound companion under the shared
/// coupling: the upper bound counts, in addition to the true arrivals, fresh
/// clock fires of the customers already waiting in the queue (customers are
/// only removed from its pool when served). Returns the embedded path and
/// the upper-bound walk N^U(k), k = 0..=K; N_n(k) <= N^U_n(k) pointwise.
pub fn simulate_upper_bound(
    config: &QueueConfig,
    horizon_steps: u64,
    rng: &mut Stream,
) -> Result<(EmbeddedPath, Vec<i64>), QueueError> {
    config.validate()?;
    if config.n == 0 {
        let path = countdown_path(config.initial_queue_len() as u64);
        let upper = path.unreflected.clone();
        return Ok((path, upper));
    }
    let pop = build_population(config, rng)?;
    let mut chain = ChainState::new(&pop, rng);
    let mut upper = vec![chain.n_value()];
    let mut n_upper = chain.n_value();
    let mut path = EmbeddedPath {
        arrivals: Vec::new(),
        unreflected: vec![chain.n_value()],
        queue: vec![chain.q_value()],
        served_order: Vec::new(),
        busy_period_ends: Vec::new(),
        parent: Vec::new(),
    };
    while chain.steps() < horizon_steps {
        if chain.queue_len() == 0 && chain.idle_pick(rng).is_err() {
            break;
        }
        // extra upper-bound fires among the customers waiting behind the
        // one entering service
        let served = *chain.queue.front().expect("queue nonempty");
        let service_time = chain.services_scaled[served as usize];
        let mut extra = 0u32;
        if service_time > 0.0 && chain.queue_len() > 1 {
            if chain.alpha_is_zero {
                let p = -math::expm1(-chain.lambda * service_time);
                extra = binomial(chain.queue_len() - 1, p, rng) as u32;
            } else {
                for &id in chain.queue.iter().skip(1) {
                    let clock = rng.exponential(chain.lambda * chain.weights[id as usize]);
                    if clock <= service_time {
                        extra += 1;
                    }
                }
            }
        }
        let step = chain.step_embedded(rng).expect("queue nonempty");
        n_upper += (step.arrivals + extra) as i64 - 1;
        upper.push(n_upper);
        path.arrivals.push(step.arrivals);
        path.unreflected.push(chain.n_value());
        path.queue.push(chain.q_value());
        path.served_order.push(step.served);
        if step.queue_after == 0 {
            path.busy_period_ends.push(chain.steps());
        }
    }
    path.parent = chain.parent;
    Ok((path, upper))
}

/// Criticality diagnostic of the associated rank-1 random graph: Σ S_i² / Σ S_i.
pub fn criticality_diagnostic(services: &[f64]) -> f64 {
    debug_assert!(!services.is_empty());
    let mut num = 0.0;
    let mut den = 0.0;
    for &s in services {
        num += s * s;
        den += s;
    }
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{abs, exp, powf, sqrt};
    use crate::stats;

    fn exp_config(n: usize, alpha: f64) -> QueueConfig {
        QueueConfig {
            n,
            alpha,
            beta: 1.0,
            q: 1.0,
            dist: ServiceDistribution::exponential(1.0).unwrap(),
            lambda_mode: LambdaMode::Analytic,
        }
    }

    #[test]
    fn analytic_lambda_examples() {
        let det = QueueConfig {
            dist: ServiceDistribution::deterministic(1.0).unwrap(),
            ..exp_config(100, 0.0)
        };
        assert!(abs(det.lambda().unwrap() - 1.0) < 1e-14);
        let e1 = exp_config(100, 1.0);
        assert!(abs(e1.lambda().unwrap() - 0.5) < 1e-14);
        let e_half = exp_config(100, 0.5);
        // 1 / Γ(5/2)
        assert!(abs(e_half.lambda().unwrap() - 0.752_252_778_063_675) < 1e-13);
    }

    #[test]
    fn initial_queue_floor_rule() {
        let c = exp_config(10_000, 0.0);
        assert_eq!(c.initial_queue_len(), 21); // ⌊21.544⌋
        let c = exp_config(100, 0.0);
        assert_eq!(c.initial_queue_len(), 4); // ⌊4.642⌋
        let fixed = QueueConfig {
            lambda_mode: LambdaMode::Fixed { lambda: 0.01 },
            ..exp_config(10, 0.0)
        };
        assert_eq!(fixed.initial_queue_len(), 1);
    }

    #[test]
    fn empty_pool_countdown() {
        let c = QueueConfig {
            n: 0,
            q: 3.0,
            ..exp_config(0, 0.0)
        };
        let mut rng = Stream::new(5);
        let path = simulate_path(&c, 100, &mut rng).unwrap();
        assert_eq!(path.queue, vec![3, 2, 1, 0]);
        let bp = simulate_first_busy_period_fast(&c, &mut rng).unwrap();
        assert_eq!(bp.customers_served, 3);
        assert_eq!(path.first_busy_period(), Some(3));
    }

    #[test]
    fn population_scaling_invariants() {
        let c = exp_config(500, 0.5);
        let mut rng = Stream::new(11);
        let pop = build_population(&c, &mut rng).unwrap();
        let ts = c.speed_factor() / 500.0;
        for i in 0..500 {
            assert_eq!(pop.scaled_services[i], pop.services[i] * ts);
            assert!(abs(pop.alpha_weights[i] - sqrt(pop.services[i])) < 1e-15);
        }
        assert_eq!(pop.initial_queue, 7); // ⌊500^{1/3}⌋ = ⌊7.937⌋
    }

    #[test]
    fn zero_service_time_produces_no_arrivals() {
        let c = exp_config(50, 0.5);
        let mut rng = Stream::new(13);
        let pop = build_population(&c, &mut rng).unwrap();
        let mut chain = ChainState::new(&pop, &mut rng);
        assert!(chain.draw_arrivals(0.0, &mut rng).is_empty());
        let before = chain.pool_len();
        assert!(chain.draw_arrivals(-1.0, &mut rng).is_empty());
        assert_eq!(chain.pool_len(), before);
    }

    /// Two-customer pool, deterministic unit services, α = 0: each pool
    /// customer joins a service of length s independently with probability
    /// 1 - e^{-λs}; the mean arrival count matches to three standard errors.
    #[test]
    fn arrival_count_matches_bernoulli_mean() {
        let c = QueueConfig {
            n: 2,
            q: 0.0,
            dist: ServiceDistribution::deterministic(1.0).unwrap(),
            ..exp_config(2, 0.0)
        };
        let mut rng = Stream::new(17);
        let pop = build_population(&c, &mut rng).unwrap();
        let service = pop.scaled_services[0]; // c_{n,β}/2
        let p = 1.0 - exp(-pop.lambda * service);
        let want = 2.0 * p;
        let reps = 1_000_000;
        let mut total = 0u64;
        for _ in 0..reps {
            let mut chain = ChainState::new(&pop, &mut rng);
            total += chain.draw_arrivals(service, &mut rng).len() as u64;
        }
        let mean = total as f64 / reps as f64;
        let var = 2.0 * p * (1.0 - p);
        let se = sqrt(var / reps as f64);
        assert!(abs(mean - want) < 3.0 * se + 1e-9, "mean {mean} want {want}");
    }

    #[test]
    fn size_biased_pick_two_elements() {
        let mut rng = Stream::new(19);
        let weights = [1.0, 2.0]; // α = 1 over services 1, 2
        let reps = 300_000;
        let mut picked_second = 0u64;
        for _ in 0..reps {
            if size_biased_pick(&weights, &mut rng) == 1 {
                picked_second += 1;
            }
        }
        let freq = picked_second as f64 / reps as f64;
        let se = sqrt(2.0 / 3.0 * (1.0 / 3.0) / reps as f64);
        assert!(abs(freq - 2.0 / 3.0) < 4.0 * se, "{freq}");
    }

    #[test]
    fn uniform_pick_when_alpha_zero() {
        // α = 0 weights are all 1
        let mut rng = Stream::new(23);
        let weights = [1.0; 4];
        let mut counts = [0u64; 4];
        let reps = 200_000;
        for _ in 0..reps {
            counts[size_biased_pick(&weights, &mut rng)] += 1;
        }
        for &c in &counts {
            let freq = c as f64 / reps as f64;
            assert!(abs(freq - 0.25) < 0.01, "{freq}");
        }
    }

    /// First pick with an empty initial queue: `idle_pick` itself follows the
    /// size-biased law over the live pool.
    #[test]
    fn idle_pick_distribution() {
        // arrival clocks effectively never fire, so the queue drains to empty
        // after every service and each pick exercises the idle path
        let pop = Population {
            services: alloc::vec![1.0, 2.0, 3.0],
            alpha_weights: alloc::vec![1.0, 2.0, 3.0], // α = 1
            lambda: 1e-12,
            speed_factor: 1.0,
            scaled_services: alloc::vec![1.0, 2.0, 3.0],
            initial_queue: 0,
            alpha: 1.0,
        };
        let mut rng = Stream::new(71);
        let reps = 60_000u64;
        let mut counts = [0u64; 3];
        for _ in 0..reps {
            let mut chain = ChainState::new(&pop, &mut rng);
            assert_eq!(chain.queue_len(), 0);
            let id = chain.idle_pick(&mut rng).unwrap();
            counts[id as usize] += 1;
            assert_eq!(chain.pool_len(), 2);
        }
        let observed: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
        let expected: Vec<f64> = [1.0, 2.0, 3.0]
            .iter()
            .map(|w| w / 6.0 * reps as f64)
            .collect();
        let p = stats::chi_square_p(&observed, &expected);
        assert!(p > 0.001, "chi-square p = {p}");
        // exhausting the pool signals completion
        let mut chain = ChainState::new(&pop, &mut rng);
        for _ in 0..3 {
            chain.idle_pick(&mut rng).unwrap();
            chain.step_embedded(&mut rng).unwrap();
        }
        assert_eq!(chain.idle_pick(&mut rng), Err(ChainSignal::PoolExhausted));
    }

    /// Pool S = [1, 2, 3], α = 1/2: pick frequencies match √S weights
    /// (chi-square p > 0.001 over 1e5 picks).
    #[test]
    fn size_biased_pick_chi_square() {
        let weights = [1.0, sqrt(2.0), sqrt(3.0)];
        let total: f64 = weights.iter().sum();
        let mut rng = Stream::new(29);
        let reps = 100_000u64;
        let mut counts = [0u64; 3];
        for _ in 0..reps {
            counts[size_biased_pick(&weights, &mut rng)] += 1;
        }
        let expected: Vec<f64> = weights.iter().map(|w| w / total * reps as f64).collect();
        let observed: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
        let p = stats::chi_square_p(&observed, &expected);
        assert!(p > 0.001, "chi-square p = {p}");
    }

    /// The first-served customer is the first size-biased arrival, so for
    /// exponential(1) services and α = 1 its mean service is E[S²]/E[S] = 2.
    #[test]
    fn first_served_is_size_biased() {
        // pool large enough that the finite-pool bias of E[Σ S²/Σ S]
        // (order 1/n) is far below the Monte Carlo resolution
        let c = exp_config(10_000, 1.0);
        let mut rng = Stream::new(31);
        let reps = 20_000;
        let mut acc = 0.0;
        let mut acc2 = 0.0;
        for _ in 0..reps {
            let pop = build_population(&c, &mut rng).unwrap();
            let chain = ChainState::new(&pop, &mut rng);
            let first = *chain.queue.front().unwrap();
            let s = pop.services[first as usize];
            acc += s;
            acc2 += s * s;
        }
        let mean = acc / reps as f64;
        let var = acc2 / reps as f64 - mean * mean;
        let se = sqrt(var / reps as f64);
        assert!(abs(mean - 2.0) < 3.0 * se, "mean {mean}, se {se}");
    }

    #[test]
    fn reflection_and_conservation_invariants() {
        let c = QueueConfig {
            n: 300,
            ..exp_config(300, 0.5)
        };
        let mut rng = Stream::new(37);
        let path = simulate_path(&c, 250, &mut rng).unwrap();
        // reflection identity, exactly as integers
        let mut running_min = 0i64;
        for k in 0..path.queue.len() {
            running_min = running_min.min(path.unreflected[k]);
            let neg_part = running_min.min(0);
            assert_eq!(path.queue[k] as i64, path.unreflected[k] - neg_part);
        }
        // Q recursion
        for k in 1..path.queue.len() {
            let expect = (path.queue[k - 1] as i64 + path.arrivals[k - 1] as i64 - 1).max(0);
            assert_eq!(path.queue[k] as i64, expect);
        }
        // served ids are distinct
        let mut seen = vec![false; 300];
        for &id in &path.served_order {
            assert!(!seen[id as usize], "duplicate service");
            seen[id as usize] = true;
        }
    }

    #[test]
    fn chain_conserves_customers() {
        let c = exp_config(200, 1.0);
        let mut rng = Stream::new(41);
        let pop = build_population(&c, &mut rng).unwrap();
        let mut chain = ChainState::new(&pop, &mut rng);
        for _ in 0..150 {
            if chain.queue_len() == 0 && chain.idle_pick(&mut rng).is_err() {
                break;
            }
            chain.step_embedded(&mut rng).unwrap();
            assert_eq!(
                chain.pool_len() + chain.queue_len() + chain.served_count(),
                200
            );
        }
    }

    #[test]
    fn forest_roots_and_tree_sizes() {
        let c = exp_config(2000, 0.5);
        let mut rng = Stream::new(43);
        let path = simulate_path(&c, 4000, &mut rng).unwrap();
        let bp = path.first_busy_period().expect("busy period in horizon") as usize;
        let q0 = c.initial_queue_len();
        assert!(bp >= q0);
        // position of each customer in the service order
        let mut pos = vec![usize::MAX; 2000];
        for (k, &id) in path.served_order.iter().enumerate() {
            pos[id as usize] = k;
        }
        let mut roots = 0;
        for &id in &path.served_order[..bp] {
            match path.parent[id as usize] {
                None => roots += 1,
                Some(p) => {
                    // parents are served strictly earlier: links are acyclic
                    assert!(pos[p as usize] < pos[id as usize]);
                    // and within the same busy period
                    assert!(pos[p as usize] < bp);
                }
            }
        }
        // roots of the first busy period are exactly the initial customers
        assert_eq!(roots, q0);
        // total vertices of the first-busy-period forest = customers served
        let vertices = path.served_order[..bp].len();
        assert_eq!(vertices as u64, path.first_busy_period().unwrap());
    }

    /// The timeline simulator and the per-step chain produce the same busy
    /// period law: total variation < 0.01 over 1e6 runs each (n = 3,
    /// deterministic unit services, α = 0).
    #[test]
    fn fast_and_slow_busy_periods_agree_in_law() {
        let c = QueueConfig {
            n: 3,
            dist: ServiceDistribution::deterministic(1.0).unwrap(),
            ..exp_config(3, 0.0)
        };
        assert_eq!(c.initial_queue_len(), 1);
        let reps = 1_000_000usize;
        let mut rng = Stream::new(47);
        let mut hist_fast = [0u64; 5];
        let mut hist_slow = [0u64; 5];
        for _ in 0..reps {
            let f = simulate_first_busy_period_fast(&c, &mut rng).unwrap();
            hist_fast[(f.customers_served as usize).min(4)] += 1;
            let s = simulate_first_busy_period_slow(&c, &mut rng).unwrap();
            hist_slow[(s.customers_served as usize).min(4)] += 1;
        }
        let tv: f64 = hist_fast
            .iter()
            .zip(hist_slow.iter())
            .map(|(&a, &b)| abs(a as f64 - b as f64) / reps as f64)
            .sum::<f64>()
            / 2.0;
        assert!(tv < 0.01, "total variation {tv}");
    }

    #[test]
    fn busy_period_at_least_initial_queue() {
        let c = exp_config(500, 1.0);
        let mut rng = Stream::new(53);
        for _ in 0..200 {
            let bp = simulate_first_busy_period_fast(&c, &mut rng).unwrap();
            assert!(bp.customers_served >= bp.initial_queue);
            assert!(
                abs(bp.scaled_value - bp.customers_served as f64 / powf(500.0, 2.0 / 3.0))
                    < 1e-12
            );
        }
    }

    #[test]
    fn coupling_dominance_holds_pathwise() {
        let c = exp_config(200, 0.5);
        let mut rng = Stream::new(59);
        for _ in 0..20 {
            let (path, upper) = simulate_upper_bound(&c, 150, &mut rng).unwrap();
            assert_eq!(path.unreflected.len(), upper.len());
            for (n, nu) in path.unreflected.iter().zip(upper.iter()) {
                assert!(n <= nu, "coupling violated: {n} > {nu}");
            }
        }
    }

    #[test]
    fn empty_pool_upper_bound_decreases_in_lockstep() {
        let c = QueueConfig {
            n: 0,
            q: 2.0,
            ..exp_config(0, 0.0)
        };
        let mut rng = Stream::new(61);
        let (path, upper) = simulate_upper_bound(&c, 10, &mut rng).unwrap();
        assert_eq!(path.unreflected, vec![2, 1, 0]);
        assert_eq!(upper, vec![2, 1, 0]);
    }

    #[test]
    fn criticality_diagnostic_values() {
        assert!(abs(criticality_diagnostic(&[1.0, 1.0, 1.0]) - 1.0) < 1e-15);
        assert!(abs(criticality_diagnostic(&[2.0]) - 2.0) < 1e-15);
        let d = ServiceDistribution::exponential(1.0).unwrap();
        let mut rng = Stream::new(67);
        let sample = d.sample(1_000_000, &mut rng);
        // E[S²]/E[S] = 2
        assert!(abs(criticality_diagnostic(&sample) - 2.0) < 0.02);
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut c = exp_config(100, 1.5);
        assert!(c.validate().is_err());
        c.alpha = 0.5;
        c.q = -1.0;
        assert!(c.validate().is_err());
        c.q = 100.0; // q n^{1/3} > n
        assert!(c.validate().is_err());
    }
}
