//! Simulation and numerics for finite-pool single-server queues in heavy traffic.
//!
//! A pool of `n` customers with i.i.d. service requirements `S` feeds a single
//! server. Customer `i` joins after an exponential time with rate `λ S_i^α`,
//! so larger jobs tend to join earlier (`α ∈ [0, 1]` interpolates between
//! i.i.d. arrivals and the exploration process of a rank-1 inhomogeneous
//! random graph). The crate provides:
//!
//! * exact simulation of the queue-length chain embedded at service
//!   completions, busy periods, and the random forest spanned by the first
//!   busy period ([`queue`]);
//! * the heavy-traffic diffusion parameterization `(q, β, γ, σ)` and path
//!   rescaling ([`scaling`]);
//! * Euler simulation of the limiting diffusion with quadratic drift and its
//!   first hitting time of zero ([`diffusion`]);
//! * the closed-form first-passage-time density built from Airy functions
//!   ([`airy`], [`fpt`]);
//! * Monte Carlo aggregation helpers: summaries, Gaussian KDE,
//!   Kolmogorov-Smirnov and chi-square statistics ([`stats`]).
//!
//! The crate is `no_std`-compatible (requires `alloc`); all transcendental
//! functions go through `libm` so results do not depend on the platform libm
//! or on the `std` feature.

#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` is the NaN-rejecting validation idiom used throughout
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod airy;
pub mod diffusion;
pub mod dist;
pub mod fpt;
pub(crate) mod math;
pub mod queue;
pub mod rng;
pub mod scaling;
pub mod stats;

pub use dist::ServiceDistribution;
pub use fpt::FptDensity;
pub use queue::{BusyPeriodRecord, EmbeddedPath, LambdaMode, Population, QueueConfig};
pub use rng::Stream;
pub use scaling::DiffusionParams;
