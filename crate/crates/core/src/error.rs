use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("precondition not met: {0}")]
    Precondition(String),
    #[error("missing data: {0}")]
    MissingData(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}

pub(crate) fn invariant<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Invariant(msg.into()))
}
