use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to parse {what}: {message}")]
    Parse { what: String, message: String },

    #[error("invalid scenario: {0}")]
    Validation(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("resource cap exceeded: {0}")]
    CapExceeded(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-parsable class name used on the command line.
    pub fn class(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse",
            Error::Validation(_) | Error::Numeric(_) => "validate",
            Error::Infeasible(_) => "infeasible",
            Error::CapExceeded(_) => "cap-exceeded",
            Error::Io { .. } => "io",
        }
    }

    /// Process exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Validation(_) | Error::Numeric(_) => 2,
            Error::Infeasible(_) => 3,
            Error::CapExceeded(_) => 4,
            Error::Io { .. } => 5,
        }
    }
}
