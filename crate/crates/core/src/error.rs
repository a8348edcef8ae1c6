use thiserror::Error;

/// Errors raised by shiftlab operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ShiftError {
    /// A caller-supplied argument is out of range or has the wrong shape.
    #[error("argument error: {0}")]
    Argument(String),

    /// A weight family is missing an entry for `(I, j)`; `axis` is 1-based.
    #[error("structural error: missing weight for I={index:?}, j={axis}")]
    MissingWeight { index: Vec<usize>, axis: usize },

    /// The input is well-formed but outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A precondition that the caller is responsible for was not met.
    #[error("contract error: {0}")]
    Contract(String),

    /// Malformed JSON input.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, ShiftError>;

impl From<serde_json::Error> for ShiftError {
    fn from(e: serde_json::Error) -> Self {
        ShiftError::Parse(format!("line {}, column {}: {}", e.line(), e.column(), e))
    }
}
