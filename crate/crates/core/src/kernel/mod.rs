//! Random streams, samplers and the special functions behind the
//! truncated Dirichlet-process weights.

pub mod arrivals;
pub mod base;
pub mod gamma;
pub mod lse;
pub mod rng;

pub use arrivals::{arrival_ratio_logs, gamma_arrivals};
pub use base::{BaseMeasure, MixtureComponent};
pub use gamma::{
    gamma_tail_quantile_log, ln_gamma, GammaShape, GammaTailQuantile, QuantileCache,
    TabulatedTailQuantile, TailQuantile,
};
pub use lse::{log_add_exp, log_sum_exp};
pub use rng::RngStream;
