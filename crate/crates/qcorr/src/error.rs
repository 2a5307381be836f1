use thiserror::Error;

/// Errors produced by state construction, analysis, and channel application.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("no linear dependence found among the ensemble factors")]
    NoDependence,
    #[error("not locally producible: {0}")]
    NotLocallyProducible(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
