//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("total dimension {dim} exceeds cap {cap} (set UNPLAB_MAX_DIM to raise)")]
    DimensionCapExceeded { dim: usize, cap: usize },

    #[error("subsystem index {index} out of range for {count} subsystems")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("solver did not converge: best gap {gap:.3e} after {iterations} iterations")]
    SolverNonConvergence { gap: f64, iterations: usize },

    #[error("leakage channel validation failed [{clause}]: {detail}")]
    LeakageValidation { clause: String, detail: String },

    #[error("weak design construction failed at set {index}: {detail}")]
    DesignConstruction { index: usize, detail: String },

    #[error("size cap exceeded: {0}")]
    SizeCap(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
