use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Two objects that must share a length (or a space) do not.
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("class is empty")]
    EmptyClass,

    /// A parameter lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Input data fails validation (bad weights, duplicate labels, ...).
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("capacity exceeded: {what} has size {size}, cap is {cap}")]
    Capacity { what: String, size: u128, cap: u128 },

    #[error("observed value {value} matches no member of the class")]
    UnknownFunction { value: f64 },

    /// A construction invariant was broken; indicates a bug or corrupt input.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn capacity(what: impl Into<String>, size: u128, cap: u128) -> Self {
        Error::Capacity {
            what: what.into(),
            size,
            cap,
        }
    }
}
