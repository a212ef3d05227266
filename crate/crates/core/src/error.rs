use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Input data violates a type invariant.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// The requested configuration has no exact solver.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Oracle grid sizes above the desk-scale caps.
    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),

    #[error("scenario parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
