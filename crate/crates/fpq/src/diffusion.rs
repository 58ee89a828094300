//! Euler simulation of the limiting diffusion and its first passage to zero.
//!
//! W(t) = q + βt - γt² + σB(t) has additive noise, so the Euler drift is
//! exact on the grid and only the hitting time discretizes. The reflected
//! process is φ(W)(t) = W(t) - min(0, min_{s<=t} W(s)); its first hitting
//! time of zero is the first time W reaches its running minimum at a
//! nonpositive level.

use alloc::vec::Vec;

use crate::math;
use crate::rng::Stream;
use crate::scaling::DiffusionParams;

/// How grid crossings are detected when estimating hitting times.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CrossingRule {
    /// First grid point at which the reflected value is <= 0. Biases the
    /// hitting time upward by O(σ√dt).
    Grid,
    /// Additionally detects intra-step crossings of the current barrier with
    /// the Brownian-bridge probability exp(-2 d₀ d₁ / (σ² dt)).
    BrownianBridge,
}

/// A simulated diffusion path with its reflection.
#[derive(Clone, Debug)]
pub struct DiffusionPath {
    pub dt: f64,
    pub values: Vec<f64>,
    pub reflected: Vec<f64>,
}

/// Simulate W on [0, horizon] with step dt:
/// W_{k+1} = W_k + (β - 2γ(t_k + dt/2)) dt + σ√dt Z_k.
pub fn simulate_w(
    params: &DiffusionParams,
    horizon: f64,
    dt: f64,
    rng: &mut Stream,
) -> DiffusionPath {
    debug_assert!(dt > 0.0 && dt <= horizon);
    let steps = (horizon / dt) as usize;
    let sqrt_dt = math::sqrt(dt);
    let mut values = Vec::with_capacity(steps + 1);
    let mut w = params.q;
    values.push(w);
    for k in 0..steps {
        // midpoint drift makes the quadratic drift exact on the grid
        let t_mid = (k as f64 + 0.5) * dt;
        w += (params.beta - 2.0 * params.gamma * t_mid) * dt
            + params.sigma * sqrt_dt * rng.normal();
        values.push(w);
    }
    let reflected = reflect(&values);
    DiffusionPath {
        dt,
        values,
        reflected,
    }
}

/// The reflection map applied to a discrete path.
pub fn reflect(values: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut running_min = f64::INFINITY;
    for &v in values {
        running_min = running_min.min(v);
        out.push(v - running_min.min(0.0));
    }
    out
}

/// First grid time t > 0 with reflected value <= 0, or None if the horizon
/// was exceeded (the caller extends the horizon).
pub fn hitting_time_of_zero(path: &DiffusionPath) -> Option<f64> {
    path.reflected
        .iter()
        .enumerate()
        .skip(1)
        .find(|(_, &r)| r <= 0.0)
        .map(|(k, _)| k as f64 * path.dt)
}

/// Streaming hitting-time sampler (no path storage); equal in law to
/// `hitting_time_of_zero(&simulate_w(...))` under the Grid rule.
pub fn sample_hitting_time(
    params: &DiffusionParams,
    dt: f64,
    horizon: f64,
    rule: CrossingRule,
    rng: &mut Stream,
) -> Option<f64> {
    let steps = (horizon / dt) as usize;
    let sqrt_dt = math::sqrt(dt);
    let sigma2_dt = params.sigma * params.sigma * dt;
    let mut w = params.q;
    let mut running_min = w;
    for k in 0..steps {
        let t_mid = (k as f64 + 0.5) * dt;
        let barrier = running_min.min(0.0);
        let w_next = w
            + (params.beta - 2.0 * params.gamma * t_mid) * dt
            + params.sigma * sqrt_dt * rng.normal();
        if w_next <= barrier {
            return Some((k + 1) as f64 * dt);
        }
        if rule == CrossingRule::BrownianBridge && sigma2_dt > 0.0 {
            let p = math::exp(-2.0 * (w - barrier) * (w_next - barrier) / sigma2_dt);
            if rng.uniform() < p {
                return Some((k + 1) as f64 * dt);
            }
        }
        w = w_next;
        running_min = running_min.min(w);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::abs;

    fn params(q: f64, beta: f64, gamma: f64, sigma: f64) -> DiffusionParams {
        DiffusionParams {
            q,
            beta,
            gamma,
            sigma,
        }
    }

    #[test]
    fn deterministic_quadratic_root_sqrt2() {
        // W(t) = 1 - t²/2 hits zero at √2
        let p = params(1.0, 0.0, 0.5, 0.0);
        let dt = 1e-4;
        let mut rng = Stream::new(1);
        let path = simulate_w(&p, 3.0, dt, &mut rng);
        let hit = hitting_time_of_zero(&path).unwrap();
        assert!(abs(hit - core::f64::consts::SQRT_2) <= dt + 1e-9, "{hit}");
    }

    #[test]
    fn deterministic_quadratic_root_one_plus_sqrt3() {
        // 1 + t - t²/2 = 0 at t = 1 + √3
        let p = params(1.0, 1.0, 0.5, 0.0);
        let dt = 1e-4;
        let mut rng = Stream::new(2);
        let hit = sample_hitting_time(&p, dt, 5.0, CrossingRule::Grid, &mut rng).unwrap();
        assert!(abs(hit - 2.732_050_807_568_877) <= dt + 1e-9, "{hit}");
    }

    #[test]
    fn zero_start_negative_drift_hits_immediately() {
        let p = params(0.0, -1.0, 0.5, 0.0);
        let dt = 1e-3;
        let mut rng = Stream::new(3);
        let hit = sample_hitting_time(&p, dt, 1.0, CrossingRule::Grid, &mut rng).unwrap();
        assert_eq!(hit, dt);
    }

    #[test]
    fn reflected_equals_drift_until_two_then_zero() {
        // σ = 0, q = 0, β = 1, γ = 1/2: W(t) = t - t²/2 >= 0 on [0, 2]
        let p = params(0.0, 1.0, 0.5, 0.0);
        let dt = 1e-3;
        let mut rng = Stream::new(4);
        let path = simulate_w(&p, 3.0, dt, &mut rng);
        for (k, (&v, &r)) in path.values.iter().zip(path.reflected.iter()).enumerate() {
            let t = k as f64 * dt;
            if t <= 2.0 {
                assert!(abs(r - v) < 1e-12);
            } else {
                assert!(r <= 2.0 * dt, "reflected stays near zero after t=2: {r}");
            }
        }
    }

    #[test]
    fn reflection_idempotent_and_nonnegative() {
        let p = params(1.0, 1.0, 0.5, math::sqrt(2.0));
        let mut rng = Stream::new(5);
        for _ in 0..25 {
            let path = simulate_w(&p, 2.0, 1e-3, &mut rng);
            let twice = reflect(&path.reflected);
            for (a, b) in path.reflected.iter().zip(twice.iter()) {
                assert!(a >= &0.0);
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn gaussian_marginal_mean_at_one() {
        let p = params(1.0, 1.0, 0.5, math::sqrt(2.0));
        let reps = 100_000;
        let mut rng = Stream::new(6);
        let dt = 1e-2;
        let mut acc = 0.0;
        for _ in 0..reps {
            let mut w = p.q;
            let sqrt_dt = math::sqrt(dt);
            for k in 0..100 {
                let t_mid = (k as f64 + 0.5) * dt;
                w += (p.beta - 2.0 * p.gamma * t_mid) * dt + p.sigma * sqrt_dt * rng.normal();
            }
            acc += w;
        }
        let mean = acc / reps as f64;
        let want = p.q + p.beta - p.gamma;
        let tol = 3.0 * p.sigma / math::sqrt(reps as f64);
        assert!(abs(mean - want) < tol, "mean {mean} want {want}");
    }

    /// With common random numbers, increasing γ never increases the hitting
    /// time, path-wise.
    #[test]
    fn hitting_time_monotone_in_gamma_with_crn() {
        for rep in 0..200 {
            let mut r1 = Stream::substream(7, rep);
            let mut r2 = r1.clone();
            let h1 = sample_hitting_time(
                &params(1.0, 1.0, 0.5, 1.0),
                1e-3,
                50.0,
                CrossingRule::Grid,
                &mut r1,
            );
            let h2 = sample_hitting_time(
                &params(1.0, 1.0, 1.5, 1.0),
                1e-3,
                50.0,
                CrossingRule::Grid,
                &mut r2,
            );
            let (h1, h2) = (h1.expect("hit"), h2.expect("hit"));
            assert!(h2 <= h1, "rep {rep}: γ↑ but hit {h2} > {h1}");
        }
    }

    #[test]
    fn streaming_matches_path_based() {
        let p = params(1.0, 1.0, 0.5, math::sqrt(2.0));
        for seed in 0..20 {
            let mut r1 = Stream::substream(8, seed);
            let mut r2 = Stream::substream(8, seed);
            let path = simulate_w(&p, 30.0, 1e-3, &mut r1);
            let a = hitting_time_of_zero(&path);
            let b = sample_hitting_time(&p, 1e-3, 30.0, CrossingRule::Grid, &mut r2);
            assert_eq!(a, b);
        }
    }
}
