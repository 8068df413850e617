use thiserror::Error;

/// Failures shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is numerically singular (pivot {pivot:e} below threshold {threshold:e})")]
    SingularMatrix { pivot: f64, threshold: f64 },

    #[error("expected a square matrix, got {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("vector {index} is numerically dependent on its predecessors")]
    NumericallyDependent { index: usize },

    #[error("invalid dimension {0}: need n >= 2")]
    InvalidDimension(usize),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("enumeration of {0} outcomes exceeds the limit of 1e6")]
    EnumerationTooLarge(u128),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("non-finite entry at index {0}")]
    NonFinite(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
