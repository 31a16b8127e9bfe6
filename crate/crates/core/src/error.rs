use thiserror::Error;

/// Errors raised by every fallible operation in the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("schema error: {0}")]
    Schema(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("evaluation error: {0}")]
    Eval(String),

    #[error("search space too large: {cardinality} cases exceed the ceiling of {ceiling}")]
    TooLarge { cardinality: u128, ceiling: u128 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("not implemented: {0}")]
    NotImplemented(String),

    #[error("json error: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Json(err.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
