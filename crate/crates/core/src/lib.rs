//! Frontier estimation with kernel regression on high-order conditional moments.
//!
//! The upper boundary `g` of the support of `(X, Y)` is estimated from
//! kernel-smoothed moments `μ̂_p(x)` of growing order `p`. The crate provides
//!
//! * [`model`]: a Hall-class data-generating model with closed-form moments,
//! * [`kernel`] and [`moments`]: compactly supported kernels and overflow-free
//!   empirical moments,
//! * [`estimator`]: the frontier estimator, rate schedules and sup-norm errors,
//! * [`oracle`] and [`selfcheck`]: exact and asymptotic moment computations,
//! * [`study`]: reproducible Monte Carlo convergence studies.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dataset;
pub mod error;
pub mod estimator;
pub mod kernel;
pub mod model;
pub mod moments;
pub mod oracle;
pub mod quadrature;
pub mod selfcheck;
pub mod special;
pub mod study;

pub use error::{Error, Result};
pub use estimator::{
    estimate_at, estimate_grid, rate_exponents, schedule, sup_error, w_rate, EstimateFailure,
    EstimateRecord, EstimatorConfig, RateSchedule, SupError,
};
pub use kernel::{KernelProfile, KernelSpec};
pub use model::{AxisDensity, FrontierModel, ModelSpec, Omega, Sample, ScalarField, ValidationReport};
pub use moments::{effective_count, moment_ratio, scaled_moment, KernelWindow, ScaledMoment};
pub use study::{run_study, StudyConfig, StudyReport};
