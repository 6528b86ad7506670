use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{path}: {msg}")]
    Format { path: PathBuf, msg: String },

    #[error("config line {line}: key `{key}`: {msg}")]
    Config {
        key: String,
        line: usize,
        msg: String,
    },

    #[error("{0}")]
    InvalidInput(String),

    #[error("time reversal: {now} us after {last} us")]
    TimeReversal { last: u64, now: u64 },

    #[error("size mismatch: {0}")]
    SizeMismatch(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// Short machine-readable category used in CLI diagnostics.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Parse { .. } => "parse",
            Error::Format { .. } => "format",
            Error::Config { .. } => "config",
            Error::InvalidInput(_) => "invalid-input",
            Error::TimeReversal { .. } => "time-order",
            Error::SizeMismatch(_) => "size-mismatch",
        }
    }
}
