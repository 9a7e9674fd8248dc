//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by calibration, estimation, model fitting, and data loading.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A configuration value is out of range or inconsistent.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// An input file does not match the expected schema.
    #[error("schema error: {0}")]
    Schema(String),

    /// A linear solve or other numerical routine failed.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Model training produced a non-finite loss.
    #[error("training diverged: {0}")]
    TrainingDiverged(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
