//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("behavior is signalling: {0}")]
    Signalling(String),

    #[error("degenerate conditioning event: {0}")]
    DegenerateConditioning(String),

    #[error("inflation: {0}")]
    Inflation(String),

    #[error("lp solver: {0}")]
    Solver(String),

    #[error("format: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
