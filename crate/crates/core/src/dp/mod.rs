//! Dirichlet-process parameters and truncated realizations.

pub mod measure;
pub mod params;
pub mod sampler;

pub use measure::WeightedDiscreteMeasure;
pub use params::{posterior_params, DpParams};
pub use sampler::{draw_realization, DpSampler, DEFAULT_TRUNCATION};
