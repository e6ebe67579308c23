use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid search space: {0}")]
    InvalidSpace(String),

    #[error("invalid trial: {0}")]
    InvalidTrial(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("matrix is not symmetric positive definite")]
    NotPositiveDefinite,

    #[error("eigendecomposition of the shape matrix failed (degenerate covariance)")]
    Decomposition,

    #[error("non-finite {what} at point {point:?}")]
    NonFinite { what: &'static str, point: Vec<f64> },

    #[error("top-gamma selection is empty: floor({gamma} * {n}) = 0; use a larger gamma or more source trials")]
    EmptySelection { gamma: f64, n: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("run history is empty")]
    EmptyHistory,

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Prefixes a config error's message; other errors pass through unchanged.
    pub fn context(self, prefix: &str) -> Self {
        match self {
            Error::Config(m) => Error::Config(format!("{prefix}: {m}")),
            other => other,
        }
    }
}
