use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("domain violation: {0}")]
    Domain(String),
    #[error("setting mismatch: {0}")]
    Setting(String),
    #[error("unsupported: {0}")]
    Capability(String),
    #[error("no tractable algorithm: {0}")]
    Hardness(String),
    #[error("resource cap exceeded: {0}")]
    Resource(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }

    /// Process exit code used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Invalid(_) | Error::Io(_) | Error::Domain(_) => 2,
            Error::Setting(_) | Error::Capability(_) | Error::Hardness(_) => 3,
            Error::Resource(_) => 4,
            Error::Verification(_) => 5,
        }
    }
}
