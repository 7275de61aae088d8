use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("resource limit: {0}")]
    Resource(String),

    /// Lanczos did not reach the requested accuracy. Carries the best Ritz values seen.
    #[error("eigensolver did not converge after {iterations} iterations (best estimates: min {emin}, max {emax})")]
    EigenNotConverged {
        iterations: usize,
        emin: f64,
        emax: f64,
    },

    /// Objective or gradient became non-finite. Carries the last finite iterate.
    #[error("non-finite objective or gradient at iteration {iteration}")]
    NonFinite { iteration: usize, last_good: Vec<f64> },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
