use thiserror::Error;

/// Errors raised by walk construction, simulation and spectral analysis.
#[derive(Debug, Error)]
pub enum QwError {
    #[error("malformed walk or state document: {0}")]
    Schema(String),

    #[error("symbol is not unitary: defect {defect:.3e} at k = {k:?}")]
    NonUnitary { defect: f64, k: Vec<f64> },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("state is not normalized (norm {0:.12})")]
    NotNormalized(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("operation requires a one-dimensional walk, got d = {0}")]
    UnsupportedDimension(usize),

    #[error("symbol at k = {k} has an eigenvalue off the unit circle (|lambda| - 1 = {deviation:.3e})")]
    NonUnitarySymbol { k: f64, deviation: f64 },

    #[error("eigenvalue tracking is ambiguous near k = {k} (gap {gap:.3e})")]
    TrackingAmbiguity { k: f64, gap: f64 },

    #[error("phase cannot be unwrapped: jump of {jump:.3} rad between adjacent samples at index {index}")]
    UnwrapFailure { index: usize, jump: f64 },

    #[error("window of {window} sites is too small: {reason}")]
    WindowTooSmall { window: usize, reason: String },

    #[error("walk is not realizable by a continuous-time walk: branch {branch} winds {winding} times")]
    NotRealizable { branch: usize, winding: i64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, QwError>;
