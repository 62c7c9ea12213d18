//! Bayesian nonparametric two-sample testing.
//!
//! Each sample gets a Dirichlet-process posterior, approximated by a
//! truncated series with decreasing weights. The test statistic is the
//! mean Kolmogorov distance between paired posterior realizations and is
//! compared against a threshold derived from the prior distance.
//!
//! The numerical kernels, discrete measures, DP sampler and distance are
//! generic over [`Real`] (`f32` or `f64`); the aliases below fix `f64`,
//! which the test orchestration uses throughout.

pub mod bench;
pub mod distance;
pub mod dp;
pub mod error;
pub mod kernel;
pub mod scalar;
pub mod two_sample;

pub use error::{Error, Result};
pub use scalar::Real;

pub use bench::{estimate_power, reproduce_table, PowerResult, Scenario, TableId};
pub use distance::kolmogorov_distance;
pub use dp::{DpParams, DpSampler, WeightedDiscreteMeasure};
pub use kernel::{BaseMeasure, RngStream};
pub use two_sample::{run_test, TestConfig, TestReport, ThresholdMode, ThresholdSource};

/// Double-precision discrete measure.
pub type Measure = WeightedDiscreteMeasure<f64>;
/// Double-precision DP parameters.
pub type Params = DpParams<f64>;
/// Double-precision DP sampler.
pub type Sampler = DpSampler<f64>;
