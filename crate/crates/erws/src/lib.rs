//! Elephant random walk with stops: exact moments, asymptotic constants,
//! reproducible Monte Carlo ensembles, and range statistics.
//!
//! The walk takes steps in {-1, 0, +1} by copying (probability p),
//! flipping (q), or stopping relative to (r) a uniformly chosen past step;
//! the memory parameters a = p - q and b = 1 - r put it in one of three
//! regimes around the critical value a = b/2. The crate provides:
//!
//! - [`core_model`]: validated parameters and regime classification;
//! - [`simulator`]: O(1)-per-step trajectory generation from the
//!   sufficient statistic (N⁺, N⁻), with derived per-replica RNG streams;
//! - [`oracle`]: exact small-n distributions by dynamic programming and
//!   path enumeration, the ground truth everything else is tested against;
//! - [`exact_moments`]: pole-free O(n) recursions for moments of
//!   (S_n, Σ_n) up to fourth order, with closed-form cross-checks;
//! - [`asymptotics`]: the phase-transition constants and scaling laws;
//! - [`montecarlo`]: reproducible parallel ensembles and distributional
//!   tests (CLT, Σ-scaling, recurrence diagnostics);
//! - [`range_analysis`]: range statistics and deterministic envelope
//!   harnesses;
//! - [`stats`]: deterministic reductions and goodness-of-fit tests.
//!
//! Numerical kernels are generic over the scalar type through
//! [`real::Real`] (implemented for `f32` and `f64`); the aliases below fix
//! the default `f64` instantiation.

pub mod asymptotics;
pub mod core_model;
pub mod error;
pub mod exact_moments;
pub mod montecarlo;
pub mod oracle;
pub mod range_analysis;
pub mod real;
pub mod simulator;
pub mod special;
pub mod stats;

pub use core_model::Regime;
pub use error::{ErwsError, Result};

/// Default `f64` parameter set.
pub type ModelParams = core_model::ModelParams<f64>;

/// Default `f64` moment table.
pub type MomentTable = exact_moments::MomentTable<f64>;

/// Default `f64` covariance suite.
pub type CovarianceSuite = exact_moments::CovarianceSuite<f64>;
