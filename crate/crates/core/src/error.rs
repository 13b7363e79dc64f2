use thiserror::Error;

/// Errors raised by the numerical laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("function is not integrable: {0}")]
    NotIntegrable(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("spectral resolution error: {0}")]
    Resolution(String),

    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("degenerate observable: eigenvalues {0} and {1} coincide")]
    Degeneracy(f64, f64),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("invalid pair ({0}, {1}): indices must differ")]
    InvalidPair(usize, usize),

    #[error("insufficient coverage: mass deficit {deficit:.3e} exceeds {tolerance:.1e}")]
    Coverage { deficit: f64, tolerance: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("normalization error: {0}")]
    Normalization(String),

    #[error("invalid state: {0}")]
    InvalidState(String),
}

pub type Result<T> = std::result::Result<T, Error>;
