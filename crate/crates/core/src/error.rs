use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Objects that must agree on shape or binding do not.
    #[error("usage error: {0}")]
    Usage(String),
    /// The N-function does not satisfy the axioms required by the operation.
    #[error("invalid N-function: {0}")]
    Axiom(String),
    /// Random operator generation did not converge.
    #[error("generation failed: {0}")]
    Generation(String),
    /// A text input could not be parsed.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}

pub(crate) fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: msg.into(),
    }
}
