use crate::Rational;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    /// The request exceeds what the method supports. `needed` carries the
    /// smallest value of the offending parameter that would be accepted,
    /// when one exists.
    #[error("capacity exceeded: {message}{}", needed.map(|n| format!(" (minimum feasible: {n})")).unwrap_or_default())]
    Capacity { message: String, needed: Option<u64> },

    /// An adversarial construction could not be certified. `margin` is the
    /// worst error rate achieved and `machine` the index of the class member
    /// attaining it.
    #[error("certification failed: machine {machine} errs at rate {margin}, required {required}")]
    Certification {
        machine: usize,
        margin: Rational,
        required: Rational,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn capacity(msg: impl Into<String>, needed: Option<u64>) -> Self {
        Error::Capacity {
            message: msg.into(),
            needed,
        }
    }
}
