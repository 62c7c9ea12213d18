use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value {value} at position {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("sample size {m1}x{m2} is outside the embedded threshold table (1..=20); use the formula or simulate mode")]
    OutsideTable { m1: usize, m2: usize },

    #[error("{replicates} replicates leave an empty {tail} tail; at least {needed} are required")]
    TooFewReplicates { replicates: usize, tail: f64, needed: usize },

    #[error("degenerate regression grid: {0}")]
    DegenerateGrid(String),

    #[error("root finder failed to converge for shape {shape} at probability {y}")]
    NoConvergence { shape: f64, y: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
