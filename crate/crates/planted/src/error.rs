//! Harness error type.

use thiserror::Error;

/// Failures surfaced by the harness.
#[derive(Debug, Error)]
pub enum Error {
    /// Error from the core library.
    #[error(transparent)]
    Core(#[from] planted_core::Error),
    /// Filesystem failure.
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    /// Malformed or mismatched JSON.
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    /// CSV writer failure.
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    /// Invalid experiment configuration.
    #[error("config: {0}")]
    Config(String),
}

/// Result alias.
pub type Result<T> = std::result::Result<T, Error>;
