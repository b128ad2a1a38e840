use thiserror::Error;

/// Errors raised by the numerical engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("truncation inadequate: tail mass {tail:.3e} exceeds threshold {threshold:.3e} at dim {dim}")]
    TruncationInadequate { tail: f64, threshold: f64, dim: usize },

    #[error("truncation overflow: squared amplitude {lost:.3e} would be pushed past the basis edge (dim {dim})")]
    TruncationOverflow { lost: f64, dim: usize },

    #[error("truncation leakage {leakage:.3e} exceeds budget {budget:.3e}")]
    Leakage { leakage: f64, budget: f64 },

    #[error("operator annihilated the entire support of the state")]
    Annihilated,

    #[error("outcome unreachable: probability {probability:.3e}")]
    Unreachable { probability: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("grid rejected: {0}")]
    Grid(String),

    #[error("serialization failed: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
