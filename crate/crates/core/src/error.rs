use thiserror::Error;

/// Errors raised by the simulation and fitting routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument violates a documented precondition (bad range, non-unit vector, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// The input is well-formed but outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A numerical procedure produced a non-finite or otherwise unusable result.
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// Reading or decoding serialized data failed.
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidInput(msg()))
    }
}
