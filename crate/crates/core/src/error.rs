use thiserror::Error;

/// Errors raised by the library. Numeric failures carry the best estimate
/// reached so callers can decide whether to keep it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate support: {0}")]
    DegenerateSupport(String),

    #[error("numeric failure: {message} (estimate {estimate}, error bound {error_bound})")]
    NumericFailure {
        message: String,
        estimate: f64,
        error_bound: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
