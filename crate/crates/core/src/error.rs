use thiserror::Error;

use crate::specfun::SpecfunError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("outside the domain: {0}")]
    Domain(String),
    #[error(transparent)]
    Specfun(#[from] SpecfunError),
    #[error("probability {value} left [-0.02, 1.02] in {context}")]
    ProbabilityExcursion { value: f64, context: String },
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("config file not found: {0}")]
    ConfigNotFound(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
