use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid algebra descriptor: {0}")]
    InvalidDescriptor(String),

    #[error("descriptor mismatch: {left} vs {right}")]
    DescriptorMismatch { left: String, right: String },

    #[error("coordinate length {got} does not match algebra dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal residual {residual:e})")]
    NotConverged { sweeps: usize, residual: f64 },

    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("index {index} out of range 1..={max}")]
    OutOfRange { index: usize, max: usize },

    #[error("invalid Jordan frame: {0}")]
    InvalidFrame(String),

    #[error("matrix is not symmetric: |a[{i}][{j}] - a[{j}][{i}]| = {gap:e}")]
    NotSymmetric { i: usize, j: usize, gap: f64 },

    #[error("map is not positive: {0}")]
    NotPositive(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
