//! Closed-form first-passage density of the limiting diffusion.
//!
//! For W(t) = q + βt - t²/2 + σB(t) (quadratic coefficient 1/2) the first
//! passage time of zero has density
//!
//! ```text
//! f(t) = e^{-((t-β)³+β³)/(6σ²) - βa} ∫_{-∞}^{∞} e^{tu}
//!        [Bi(cu)Ai(c(u-a)) - Ai(cu)Bi(c(u-a))] / (π (Ai(cu)² + Bi(cu)²)) du,
//! ```
//!
//! with c = (2σ²)^{1/3} and a = q/σ² > 0. A general quadratic coefficient γ
//! reduces to this form through the time/space scaling W(τ²t) = τ·W_std(t)
//! with τ = (2γ)^{-1/3}: the standardized parameters are q̂ = q/τ, β̂ = βτ,
//! σ̂ = σ, and density(t) = f_std(t/τ²)/τ².
//!
//! Numerics. On u > 0 the integrand decays superexponentially but its
//! factors overflow/underflow f64, so that side is integrated in log space
//! using the scaled Airy forms. On u < 0 the integrand equals
//! M(c(u-a))/M(cu) · sin(θ(cu) - θ(c(u-a))) over the π-normalization, a smooth,
//! slowly oscillating function (M, θ the Airy modulus and phase), integrated
//! over panels bounded by the asymptotic phase spacing and truncated once
//! e^{tu} < e^{-45.5}. For very small t the truncation point grows like
//! 45/t; the Airy asymptotics remain valid there, and below the point where
//! q̂²/(2σ̂²t̂) exceeds 400 the density is returned as zero (it is below
//! e^{-390} there).

use alloc::vec::Vec;

use crate::airy;
use crate::math::quad::GaussLegendre;
use crate::math::{self, cbrt, exp, ln, ln_1p, powf, sqrt};
use crate::scaling::DiffusionParams;

/// Composite Simpson over equally spaced samples (even interval count).
fn simpson_from_samples(vals: &[f64], h: f64) -> f64 {
    let n = vals.len() - 1;
    debug_assert!(n >= 2 && n.is_multiple_of(2));
    let mut acc = vals[0] + vals[n];
    for (i, &v) in vals.iter().enumerate().take(n).skip(1) {
        acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    acc * h / 3.0
}

#[derive(Clone, Debug, PartialEq)]
pub enum FptError {
    /// q, γ and σ must all be positive (the formula requires a > 0).
    InvalidParams(&'static str),
    /// The refinement check exceeded the per-point tolerance.
    QuadratureFailure { achieved: f64, required: f64 },
}

impl core::fmt::Display for FptError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            FptError::InvalidParams(what) => write!(f, "invalid parameters: {what}"),
            FptError::QuadratureFailure { achieved, required } => write!(
                f,
                "quadrature did not converge: error estimate {achieved:e} > {required:e}"
            ),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for FptError {}

/// Per-point absolute tolerance of [`FptDensity::density`].
pub const DENSITY_ABS_TOL: f64 = 1e-8;
/// Absolute tolerance of [`FptDensity::mean`].
pub const MEAN_ABS_TOL: f64 = 5e-4;

/// Evaluable first-passage density for a diffusion with parameters
/// (q, β, γ, σ).
#[derive(Clone, Debug)]
pub struct FptDensity {
    params: DiffusionParams,
    /// time standardization scale τ = (2γ)^{-1/3}
    tau: f64,
    q_std: f64,
    beta_std: f64,
    sigma2: f64,
    /// a = q̂/σ̂²
    a: f64,
    /// c = (2σ̂²)^{1/3}
    c: f64,
    gl: GaussLegendre,
}

impl FptDensity {
    pub fn new(params: DiffusionParams) -> Result<Self, FptError> {
        if !(params.q > 0.0) {
            return Err(FptError::InvalidParams("q must be > 0"));
        }
        if !(params.gamma > 0.0) {
            return Err(FptError::InvalidParams("gamma must be > 0"));
        }
        if !(params.sigma > 0.0) {
            return Err(FptError::InvalidParams("sigma must be > 0"));
        }
        let tau = powf(2.0 * params.gamma, -1.0 / 3.0);
        let q_std = params.q / tau;
        let beta_std = params.beta * tau;
        let sigma2 = params.sigma * params.sigma;
        Ok(FptDensity {
            params,
            tau,
            q_std,
            beta_std,
            sigma2,
            a: q_std / sigma2,
            c: cbrt(2.0 * sigma2),
            gl: GaussLegendre::new(20),
        })
    }

    pub fn params(&self) -> &DiffusionParams {
        &self.params
    }

    /// Standardization time scale τ = (2γ)^{-1/3}.
    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// a = q̂/σ̂² of the standardized form.
    pub fn a(&self) -> f64 {
        self.a
    }

    /// c = (2σ̂²)^{1/3} of the standardized form.
    pub fn c(&self) -> f64 {
        self.c
    }

    /// Density at t > 0, refined until two panel resolutions agree within
    /// [`DENSITY_ABS_TOL`].
    pub fn density(&self, t: f64) -> Result<f64, FptError> {
        let (value, err) = self.density_with_error(t)?;
        if err > DENSITY_ABS_TOL {
            return Err(FptError::QuadratureFailure {
                achieved: err,
                required: DENSITY_ABS_TOL,
            });
        }
        Ok(value)
    }

    /// Density together with the refinement error estimate.
    pub fn density_with_error(&self, t: f64) -> Result<(f64, f64), FptError> {
        if !(t > 0.0) {
            return Err(FptError::InvalidParams("t must be > 0"));
        }
        let t_std = t / (self.tau * self.tau);
        let coarse = self.density_std(t_std, 1);
        let fine = self.density_std(t_std, 2);
        let scale = self.tau * self.tau;
        Ok((fine / scale, math::abs(fine - coarse) / scale))
    }

    /// Mean hitting time ∫ t·density(t) dt, with a grid-doubling error check.
    pub fn mean(&self) -> Result<f64, FptError> {
        let tau2 = self.tau * self.tau;
        let (value, err) = self.log_grid_integral(1, 768);
        let (value, err) = (value * tau2, err * tau2);
        if err > MEAN_ABS_TOL {
            return Err(FptError::QuadratureFailure {
                achieved: err,
                required: MEAN_ABS_TOL,
            });
        }
        Ok(value)
    }

    /// Total mass ∫₀^∞ density(t) dt; equals 1 up to quadrature error.
    pub fn normalization(&self) -> Result<f64, FptError> {
        let (value, err) = self.log_grid_integral(0, 512);
        if err > 1e-3 {
            return Err(FptError::QuadratureFailure {
                achieved: err,
                required: 1e-3,
            });
        }
        Ok(value)
    }

    /// ∫ s^power f_std(s) ds over [1e-4, horizon] by composite Simpson in
    /// x = ln s (which resolves both the sharp onset near zero and the cubic
    /// cliff at the far end on one uniform grid). Returns the fine-grid value
    /// and the Richardson estimate against the half-resolution grid.
    fn log_grid_integral(&self, power: u32, n: usize) -> (f64, f64) {
        debug_assert!(n.is_multiple_of(4));
        let x_lo = math::ln(1e-4);
        let x_hi = math::ln(self.std_horizon());
        let h = (x_hi - x_lo) / n as f64;
        let vals: Vec<f64> = (0..=n)
            .map(|i| {
                let s = exp(x_lo + i as f64 * h);
                powf(s, power as f64 + 1.0) * self.density_std(s, 1)
            })
            .collect();
        let fine = simpson_from_samples(&vals, h);
        let coarse_vals: Vec<f64> = vals.iter().copied().step_by(2).collect();
        let coarse = simpson_from_samples(&coarse_vals, 2.0 * h);
        (fine, math::abs(fine - coarse) / 15.0)
    }

    /// Cumulative distribution tabulated on a uniform grid over [0, t_max]
    /// (original time units), for Kolmogorov-Smirnov comparisons.
    pub fn cdf_table(&self, t_max: f64, points: usize) -> Result<CdfTable, FptError> {
        if !(t_max > 0.0) || points < 8 {
            return Err(FptError::InvalidParams("cdf table needs t_max > 0, points >= 8"));
        }
        let tau2 = self.tau * self.tau;
        let n = points;
        let h_std = t_max / tau2 / n as f64;
        let mut ts = Vec::with_capacity(n + 1);
        let mut cdf = Vec::with_capacity(n + 1);
        let mut cum = 0.0;
        let mut prev = 0.0; // density_std at 0+ is 0
        ts.push(0.0);
        cdf.push(0.0);
        for k in 1..=n {
            let s = k as f64 * h_std;
            let mid = self.density_std(s - 0.5 * h_std, 1);
            let cur = self.density_std(s, 1);
            // composite Simpson over [s-h, s]
            cum += h_std / 6.0 * (prev + 4.0 * mid + cur);
            prev = cur;
            ts.push(s * tau2);
            cdf.push(cum.min(1.0));
        }
        Ok(CdfTable { ts, cdf })
    }

    /// Upper end (standard time units) beyond which the density is below
    /// ~e^{-55}: the cubic prefactor term dominates everything else.
    fn std_horizon(&self) -> f64 {
        self.beta_std + cbrt(330.0 * self.sigma2) + 2.0
    }

    /// Standardized density by block quadrature; `refine` multiplies the
    /// panel resolution.
    fn density_std(&self, t: f64, refine: usize) -> f64 {
        debug_assert!(t > 0.0);
        let (a, c) = (self.a, self.c);
        // below this point the density is under e^{-390}
        if self.q_std * self.q_std / (2.0 * self.sigma2 * t) > 400.0 {
            return 0.0;
        }
        let log_pref = -((t - self.beta_std) * (t - self.beta_std) * (t - self.beta_std)
            + self.beta_std * self.beta_std * self.beta_std)
            / (6.0 * self.sigma2)
            - self.beta_std * self.a;

        let direct = |u: f64| -> f64 {
            let (ai_x, bi_x) = airy::eval_ai_bi(c * u);
            let (ai_y, bi_y) = airy::eval_ai_bi(c * (u - a));
            let num = bi_x * ai_y - ai_x * bi_y;
            let den = core::f64::consts::PI * (ai_x * ai_x + bi_x * bi_x);
            exp(t * u) * num / den
        };

        let mut acc = 0.0;
        let u_min = -45.5 / t;
        let osc_start = (-11.0 / c).max(u_min);

        // [osc_start, 0]: at most one phase oscillation; fixed panels
        let n_a = 8 * refine;
        let ha = -osc_start / n_a as f64;
        if ha > 0.0 {
            for i in 0..n_a {
                let hi = osc_start + (n_a - i) as f64 * ha;
                acc += self.gl.integrate(hi - ha, hi, direct);
            }
        }

        // oscillatory region: panels bounded by the asymptotic phase spacing
        // (zeros of sin(θ(cu)-θ(c(u-a))) are ~π/(ac^{3/2}) apart in √-u) and
        // by the e^{tu} decay scale
        if osc_start > u_min {
            let ds = core::f64::consts::PI / (a * powf(c, 1.5)) / refine as f64;
            let du_cap = 2.5 / t / refine as f64;
            let mut u_hi = osc_start;
            let mut guard = 0usize;
            while u_hi > u_min && guard < 100_000 {
                let s_next = sqrt(-u_hi) + ds;
                let mut u_lo = -(s_next * s_next);
                if u_lo < u_hi - du_cap {
                    u_lo = u_hi - du_cap;
                }
                if u_lo < u_min {
                    u_lo = u_min;
                }
                acc += self.gl.integrate(u_lo, u_hi, direct);
                u_hi = u_lo;
                guard += 1;
            }
        }

        // [0, a]: both Airy arguments stay in the series range
        let n_m = 6 * refine;
        let hm = a / n_m as f64;
        for i in 0..n_m {
            acc += self.gl.integrate(i as f64 * hm, (i + 1) as f64 * hm, direct);
        }

        // (a, ∞): positive integrand with superexponential decay, integrated
        // in log space to dodge the Bi overflow / Ai underflow
        let log_integrand = |u: f64| -> f64 {
            let x = c * u;
            let y = c * (u - a);
            let (ln_ai_x, ln_bi_x) = airy::log_ai_bi(x);
            let (ln_ai_y, ln_bi_y) = airy::log_ai_bi(y);
            let lead = ln_bi_x + ln_ai_y;
            let delta = (ln_ai_x + ln_bi_y) - lead;
            let ln_num = lead + ln_1p(-exp(delta));
            let ln_den = ln(core::f64::consts::PI)
                + 2.0 * ln_bi_x
                + ln_1p(exp(2.0 * (ln_ai_x - ln_bi_x)));
            t * u + ln_num - ln_den
        };
        // panels grow geometrically from a; track per-panel scaled integrals
        let mut panels: Vec<(f64, f64)> = Vec::new(); // (local max, scaled value)
        let mut lo = a;
        let mut width = (0.25 * a).clamp(0.125, 1.0) / refine as f64;
        let mut global_max = f64::NEG_INFINITY;
        let mut guard = 0usize;
        loop {
            let hi = lo + width;
            let m = log_integrand(lo + 0.5 * width)
                .max(log_integrand(lo))
                .max(log_integrand(hi));
            if m.is_finite() {
                global_max = global_max.max(m);
                let v = self.gl.integrate(lo, hi, |u| exp(log_integrand(u) - m));
                panels.push((m, v));
            }
            if m < global_max - 55.0 || guard > 4000 {
                break;
            }
            lo = hi;
            width *= 1.3;
            guard += 1;
        }
        let mut pos = 0.0;
        for (m, v) in panels {
            pos += exp(m - global_max) * v;
        }

        // combine: e^{log_pref} (acc + e^{global_max} pos), kept stable
        let base = exp(log_pref) * acc;
        let far = if global_max > f64::NEG_INFINITY {
            exp(log_pref + global_max) * pos
        } else {
            0.0
        };
        base + far
    }
}

/// Tabulated CDF on a uniform grid; evaluation is monotone linear
/// interpolation (0 before the grid, the last mass after it).
#[derive(Clone, Debug)]
pub struct CdfTable {
    ts: Vec<f64>,
    cdf: Vec<f64>,
}

impl CdfTable {
    pub fn eval(&self, t: f64) -> f64 {
        if t <= self.ts[0] {
            return 0.0;
        }
        let last = *self.ts.last().expect("nonempty");
        if t >= last {
            return *self.cdf.last().expect("nonempty");
        }
        let h = self.ts[1] - self.ts[0];
        let idx = ((t - self.ts[0]) / h) as usize;
        let idx = idx.min(self.ts.len() - 2);
        let frac = (t - self.ts[idx]) / (self.ts[idx + 1] - self.ts[idx]);
        self.cdf[idx] + frac * (self.cdf[idx + 1] - self.cdf[idx])
    }

    /// Mass accumulated up to the end of the table.
    pub fn final_mass(&self) -> f64 {
        *self.cdf.last().expect("nonempty")
    }

    pub fn grid(&self) -> (&[f64], &[f64]) {
        (&self.ts, &self.cdf)
    }
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use crate::math::abs;

    fn density(q: f64, beta: f64, gamma: f64, sigma2: f64) -> FptDensity {
        FptDensity::new(DiffusionParams {
            q,
            beta,
            gamma,
            sigma: sqrt(sigma2),
        })
        .unwrap()
    }

    /// Spot values computed independently with 20-digit multiprecision
    /// quadrature of the same formula.
    #[test]
    fn standardized_density_spot_values() {
        let cases: [(f64, f64, f64, f64, f64); 20] = [
            (1.0, 1.0, 2.0, 0.3, 0.47740975868389048),
            (1.0, 1.0, 2.0, 0.8, 0.23800631145390734),
            (1.0, 1.0, 2.0, 1.5, 0.18450434597924954),
            (1.0, 1.0, 2.0, 2.0, 0.1905412259593364),
            (1.0, 1.0, 2.0, 3.5, 0.18629028916953263),
            (1.0, 1.0, 2.0, 6.0, 0.002126501398460841),
            (1.0, 1.0, 2.0, 0.1, 0.44714329139417147),
            (1.0, 1.0, 1.0, 0.5, 0.18686468186749436),
            (1.0, 1.0, 1.0, 1.5, 0.20822522695950395),
            (1.0, 1.0, 1.0, 3.0, 0.34561258259541124),
            (1.4422495703074084, 0.6933612743506347, 1.5, 1.0, 0.24269961880172853),
            (1.4422495703074084, 0.6933612743506347, 1.5, 2.2, 0.31157644739201852),
            (1.4422495703074084, 0.6933612743506347, 1.5, 4.0, 0.1046010460481159),
            (1.0, 1.0, 1.0, 2.0, 0.27137201706186996),
            (1.0, 1.0, 1.0, 3.5, 0.26340622702693393),
            (1.0, 1.0, 1.0, 4.0, 0.13340296216141795),
            (1.0, 1.0, 1.0, 5.0, 0.0067554148939685828),
            (1.0, 1.0, 1.0, 6.0, 2.1090296940128648e-5),
            (1.0, 1.0, 2.0, 4.5, 0.080552143182324376),
            (1.0, 1.0, 2.0, 5.0, 0.034649794161252294),
        ];
        for (q, beta, sigma2, t, want) in cases {
            let d = density(q, beta, 0.5, sigma2);
            let got = d.density(t).unwrap();
            assert!(
                abs(got - want) < 2e-8,
                "f(t={t}; q={q}, σ²={sigma2}) = {got:.12}, want {want:.12}"
            );
        }
    }

    /// The general-γ density is the standardized one mapped through
    /// t ↦ t/τ², value ↦ value/τ².
    #[test]
    fn scaling_relation_consistency() {
        let gen = density(1.0, 1.0, 1.5, 1.5);
        let tau2 = gen.tau() * gen.tau();
        let std_form = density(1.0 / gen.tau(), gen.tau(), 0.5, 1.5);
        for t_std in [0.5, 1.0, 2.2, 4.0] {
            let got = gen.density(t_std * tau2).unwrap();
            let want = std_form.density(t_std).unwrap() / tau2;
            assert!(abs(got - want) < 1e-10, "t_std={t_std}: {got} vs {want}");
        }
    }

    /// Applying the τ map to already-standardized parameters is the identity,
    /// so the two mean computations agree to 1e-10.
    #[test]
    fn standardization_idempotent_on_mean() {
        let gen = density(1.0, 1.0, 1.5, 1.5);
        let tau2 = gen.tau() * gen.tau();
        let std_form = density(1.0 / gen.tau(), gen.tau(), 0.5, 1.5);
        assert!(abs(std_form.tau() - 1.0) < 1e-15);
        let m_gen = gen.mean().unwrap();
        let m_std = std_form.mean().unwrap();
        assert!(abs(m_gen - tau2 * m_std) < 1e-10);
    }

    #[test]
    fn density_nonnegative_on_sample_grid() {
        let d = density(1.0, 1.0, 0.5, 2.0);
        let mut t = 0.05;
        while t < 12.0 {
            let v = d.density(t).unwrap();
            assert!(v >= -1e-12, "f({t}) = {v}");
            t += 0.23;
        }
    }

    #[test]
    fn total_mass_is_one() {
        let d = density(1.0, 1.0, 0.5, 2.0);
        let mass = d.normalization().unwrap();
        assert!(abs(mass - 1.0) < 1e-3, "mass = {mass}");
    }

    #[test]
    fn vanishes_at_both_ends() {
        // Table-1 parameter sets: density < 1e-4 at t = 1e-3 and t = 50
        let sets = [
            (1.0, 1.0, 0.5, 1.0),
            (1.0, 1.0, 0.5, 2.0),
            (1.0, 1.0, 8.0 / (3.0 * core::f64::consts::PI), 5.0 / 3.0),
            (1.0, 1.0, 1.5, 1.5),
        ];
        for (q, b, g, s2) in sets {
            let d = density(q, b, g, s2);
            let lo = d.density(1e-3).unwrap();
            let hi = d.density(50.0).unwrap();
            assert!(abs(lo) < 1e-4, "f(1e-3) = {lo} for γ={g}, σ²={s2}");
            assert!(abs(hi) < 1e-4, "f(50) = {hi} for γ={g}, σ²={s2}");
        }
    }

    /// Deterministic-services column of the reference table: mean 2.3374.
    #[test]
    fn mean_deterministic_services() {
        let d = density(1.0, 1.0, 0.5, 1.0);
        let m = d.mean().unwrap();
        assert!(abs(m - 2.3374) < 5e-3, "mean = {m}");
    }

    /// Exponential α = 0 column: mean 2.0038.
    #[test]
    fn mean_exponential_alpha_zero() {
        let d = density(1.0, 1.0, 0.5, 2.0);
        let m = d.mean().unwrap();
        assert!(abs(m - 2.0038) < 5e-3, "mean = {m}");
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(FptDensity::new(DiffusionParams {
            q: 0.0,
            beta: 1.0,
            gamma: 0.5,
            sigma: 1.0
        })
        .is_err());
        assert!(FptDensity::new(DiffusionParams {
            q: 1.0,
            beta: 1.0,
            gamma: -0.5,
            sigma: 1.0
        })
        .is_err());
        let d = density(1.0, 1.0, 0.5, 1.0);
        assert!(d.density(0.0).is_err());
        assert!(d.density(-1.0).is_err());
    }

    #[test]
    fn cdf_table_monotone_and_normalized() {
        let d = density(1.0, 1.0, 0.5, 2.0);
        let table = d.cdf_table(25.0, 600).unwrap();
        let (_, cdf) = table.grid();
        for w in cdf.windows(2) {
            assert!(w[1] >= w[0] - 1e-12);
        }
        assert!(abs(table.final_mass() - 1.0) < 1.5e-3, "{}", table.final_mass());
        // interpolation sane
        assert!(table.eval(0.0) == 0.0);
        assert!(table.eval(1e9) == table.final_mass());
        let mid = table.eval(2.0);
        assert!(mid > 0.3 && mid < 0.8, "{mid}");
    }
}

