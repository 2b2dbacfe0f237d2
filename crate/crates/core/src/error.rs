use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// A trace line could not be parsed.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Invalid configuration or input parameters.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// An exponential algorithm was asked to handle more organizations than it supports.
    #[error("coalition of {size} organizations exceeds the limit of {limit}")]
    Capacity { size: usize, limit: usize },

    /// A caller broke the contract of an operation (empty queue selected, clock moved backwards, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    /// A quantity is undefined for the given input.
    #[error("undefined: {0}")]
    Domain(String),

    /// Exact integer bookkeeping left the representable range.
    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
}
