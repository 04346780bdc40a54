use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Input outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Malformed or inconsistent parameters.
    #[error("validation error: {0}")]
    Validation(String),
    /// An operation needing a non-empty word got an empty one.
    #[error("empty word")]
    EmptyWord,
    /// A budget (terms, states, iterations, precision) was exhausted.
    /// `achieved` carries the best enclosure reached, when there is one.
    #[error("resource limit: {message}")]
    Resource { message: String, achieved: Option<(f64, f64)> },
    /// A consistency check inside the library failed.
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn resource(msg: impl Into<String>, achieved: Option<(f64, f64)>) -> Self {
        Error::Resource { message: msg.into(), achieved }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
