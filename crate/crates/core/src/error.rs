use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input: wrong dimensions, missing entries, bad weights.
    #[error("structural error: {0}")]
    Structural(String),
    #[error("unsupported scenario: {0}")]
    Unsupported(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("conditioning event has zero probability")]
    ZeroProbability,
    /// An internal consistency assertion failed.
    #[error("internal consistency failure: {0}")]
    Internal(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn structural<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Structural(msg.into()))
}

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
