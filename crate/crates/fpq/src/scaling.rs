//! Heavy-traffic parameterization of the limiting diffusion.
//!
//! Under the critical scaling the embedded queue length, rescaled as
//! `n^{-1/3} Q_n(t n^{2/3})`, converges to the reflection of
//!
//! ```text
//! W(t) = q + βt - γt² + σB(t),
//! γ = λ E[S^{1+2α}] / (2 E[S^α]),    σ² = λ² E[S^α] E[S^{2+α}].
//! ```
//!
//! All moments here are analytic (module [`crate::dist`]); these constants
//! define the oracles the Monte Carlo side is validated against.

use alloc::vec::Vec;

use crate::dist::{DistError, ServiceDistribution};
use crate::math;
use crate::queue::EmbeddedPath;

/// Parameters (q, β, γ, σ) of the limiting diffusion W.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DiffusionParams {
    pub q: f64,
    pub beta: f64,
    pub gamma: f64,
    pub sigma: f64,
}

impl DiffusionParams {
    pub fn sigma_squared(&self) -> f64 {
        self.sigma * self.sigma
    }
}

/// Diffusion parameters for a service distribution at exponent α, arrival
/// rate λ, criticality offset β and initial value q.
pub fn diffusion_params(
    dist: &ServiceDistribution,
    alpha: f64,
    lambda: f64,
    beta: f64,
    q: f64,
) -> Result<DiffusionParams, DistError> {
    let m_alpha = dist.moment(alpha)?;
    let m_12a = dist.moment(1.0 + 2.0 * alpha)?;
    let m_2a = dist.moment(2.0 + alpha)?;
    let gamma = lambda * m_12a / (2.0 * m_alpha);
    let sigma = math::sqrt(lambda * lambda * m_alpha * m_2a);
    Ok(DiffusionParams {
        q,
        beta,
        gamma,
        sigma,
    })
}

/// The quadratic-drift coefficient as a function of α when λ = 1/E[S^{1+α}]:
/// f(α) = E[S^{1+2α}] / (E[S^α] E[S^{1+α}]). Nondecreasing in α.
pub fn drift_coefficient(dist: &ServiceDistribution, alpha: f64) -> Result<f64, DistError> {
    let m_alpha = dist.moment(alpha)?;
    let m_1a = dist.moment(1.0 + alpha)?;
    let m_12a = dist.moment(1.0 + 2.0 * alpha)?;
    Ok(m_12a / (m_alpha * m_1a))
}

/// A diffusion-rescaled queue path: t ↦ n^{-1/3} Q_n(⌊t n^{2/3}⌋),
/// right-continuous and piecewise constant.
#[derive(Clone, Debug)]
pub struct RescaledPath {
    values: Vec<f64>,
    steps_per_unit_time: f64,
}

impl RescaledPath {
    /// Value at time t >= 0 (constant at the last value beyond the horizon).
    pub fn eval(&self, t: f64) -> f64 {
        debug_assert!(t >= 0.0);
        let idx = math::floor(t * self.steps_per_unit_time) as usize;
        self.values[idx.min(self.values.len() - 1)]
    }

    /// Length of the time interval covered by the recorded path.
    pub fn horizon(&self) -> f64 {
        self.values.len() as f64 / self.steps_per_unit_time
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Rescale an embedded path for pool size n.
pub fn rescale_path(path: &EmbeddedPath, n: usize) -> RescaledPath {
    debug_assert!(n >= 1);
    let space = math::powf(n as f64, 1.0 / 3.0);
    RescaledPath {
        values: path.queue.iter().map(|&q| q as f64 / space).collect(),
        steps_per_unit_time: math::powf(n as f64, 2.0 / 3.0),
    }
}
