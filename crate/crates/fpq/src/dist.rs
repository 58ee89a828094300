//! Service-requirement distributions with exact fractional moments.
//!
//! The heavy-traffic constants are built from E[S^r] for fractional r
//! (r = α, 1+α, 1+2α, 2+α with α ∈ [0,1]), so moments are computed
//! analytically through the Gamma function rather than estimated; the
//! Monte Carlo side of the crate is then validated against exact limits.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::{self, gamma::gamma};
use crate::rng::Stream;

/// Largest moment order any formula in the crate needs (E[S^{2+α}], α <= 1).
pub const MAX_MOMENT_ORDER: f64 = 3.0;

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "lowercase"))]
pub enum ServiceDistribution {
    /// Point mass at `value`.
    Deterministic { value: f64 },
    /// Exponential with the given rate (mean 1/rate).
    Exponential { rate: f64 },
    /// Mixture of exponentials: component `j` has weight `probs[j]` and rate
    /// `rates[j]`.
    Hyperexponential { probs: Vec<f64>, rates: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DistError {
    /// A parameter violates the distribution's invariants.
    InvalidParameter(&'static str),
    /// Requested moment order lies outside [0, 3].
    MomentOutOfRange,
}

impl core::fmt::Display for DistError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            DistError::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
            DistError::MomentOutOfRange => write!(f, "moment order outside [0, 3]"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for DistError {}

impl ServiceDistribution {
    pub fn deterministic(value: f64) -> Result<Self, DistError> {
        if !(value > 0.0) || !value.is_finite() {
            return Err(DistError::InvalidParameter("deterministic value must be > 0"));
        }
        Ok(ServiceDistribution::Deterministic { value })
    }

    pub fn exponential(rate: f64) -> Result<Self, DistError> {
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(DistError::InvalidParameter("exponential rate must be > 0"));
        }
        Ok(ServiceDistribution::Exponential { rate })
    }

    pub fn hyperexponential(probs: Vec<f64>, rates: Vec<f64>) -> Result<Self, DistError> {
        let d = ServiceDistribution::Hyperexponential { probs, rates };
        d.validate()?;
        Ok(d)
    }

    /// Check the invariants; deserialized values should be validated before use.
    pub fn validate(&self) -> Result<(), DistError> {
        match self {
            ServiceDistribution::Deterministic { value } => {
                if !(*value > 0.0) || !value.is_finite() {
                    return Err(DistError::InvalidParameter("deterministic value must be > 0"));
                }
            }
            ServiceDistribution::Exponential { rate } => {
                if !(*rate > 0.0) || !rate.is_finite() {
                    return Err(DistError::InvalidParameter("exponential rate must be > 0"));
                }
            }
            ServiceDistribution::Hyperexponential { probs, rates } => {
                if probs.is_empty() || probs.len() != rates.len() {
                    return Err(DistError::InvalidParameter(
                        "hyperexponential probs/rates must be nonempty and equal length",
                    ));
                }
                if rates.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
                    return Err(DistError::InvalidParameter("hyperexponential rates must be > 0"));
                }
                if probs.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
                    return Err(DistError::InvalidParameter("hyperexponential probs must be >= 0"));
                }
                let total: f64 = probs.iter().sum();
                if math::abs(total - 1.0) > 1e-12 {
                    return Err(DistError::InvalidParameter(
                        "hyperexponential probs must sum to 1 within 1e-12",
                    ));
                }
            }
        }
        Ok(())
    }

    /// One draw.
    pub fn sample_one(&self, rng: &mut Stream) -> f64 {
        match self {
            ServiceDistribution::Deterministic { value } => *value,
            ServiceDistribution::Exponential { rate } => rng.exponential(*rate),
            ServiceDistribution::Hyperexponential { probs, rates } => {
                let u = rng.uniform();
                let mut acc = 0.0;
                for (p, r) in probs.iter().zip(rates.iter()) {
                    acc += p;
                    if u < acc {
                        return rng.exponential(*r);
                    }
                }
                rng.exponential(*rates.last().expect("nonempty"))
            }
        }
    }

    /// `count` i.i.d. draws; deterministic given the stream state.
    pub fn sample(&self, count: usize, rng: &mut Stream) -> Vec<f64> {
        let mut out = vec![0.0; count];
        for slot in &mut out {
            *slot = self.sample_one(rng);
        }
        out
    }

    /// Exact E[S^r] for r in [0, 3].
    ///
    /// Deterministic: value^r. Exponential(rate): Γ(1+r)/rate^r.
    /// Hyperexponential: Σ p_j Γ(1+r)/rate_j^r.
    pub fn moment(&self, r: f64) -> Result<f64, DistError> {
        if !(0.0..=MAX_MOMENT_ORDER).contains(&r) {
            return Err(DistError::MomentOutOfRange);
        }
        Ok(match self {
            ServiceDistribution::Deterministic { value } => math::powf(*value, r),
            ServiceDistribution::Exponential { rate } => gamma(1.0 + r) / math::powf(*rate, r),
            ServiceDistribution::Hyperexponential { probs, rates } => {
                let g = gamma(1.0 + r);
                probs
                    .iter()
                    .zip(rates.iter())
                    .map(|(p, rate)| p * g / math::powf(*rate, r))
                    .sum()
            }
        })
    }

    /// Mean service requirement.
    pub fn mean(&self) -> f64 {
        self.moment(1.0).expect("1 is a valid order")
    }

    /// The hyperexponential used throughout the reference tables:
    /// rates 0.501 and 250.5 mixed half-half (mean exactly 1).
    pub fn table_hyperexponential() -> Self {
        ServiceDistribution::Hyperexponential {
            probs: vec![0.5, 0.5],
            rates: vec![0.501, 250.5],
        }
    }
}
