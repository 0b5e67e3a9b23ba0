//! Shared error type.

use thiserror::Error;

/// Errors produced by the symbolic and numeric layers.
#[derive(Debug, Error)]
pub enum Error {
    /// Expression or scenario-file syntax error, with a byte offset into the
    /// offending text.
    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    /// Structurally valid input outside the supported class (e.g. a gradient
    /// ideal that is not zero-dimensional).
    #[error("unsupported input: {0}")]
    Unsupported(String),

    /// A numeric routine failed to converge or hit a singular configuration
    /// (tracing without return, bracket misses, singular forms on a fiber).
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// Scenario-file validation failure (missing keys, inconsistent grids).
    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the CLI: 1 input error, 2 numeric failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Scenario(_) | Error::Io(_) => 1,
            Error::Unsupported(_) | Error::Numeric(_) => 2,
        }
    }
}
