//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A documented precondition was violated by the caller.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Shapes or dimensions of the inputs do not line up.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A config file failed to parse or validate.
    #[error("config error at line {line}: {msg}")]
    Config { line: usize, msg: String },

    /// A checkpoint could not be read or has an incompatible format.
    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }
}
