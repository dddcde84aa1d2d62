use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the analytics core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown patent id `{0}`")]
    UnknownPatent(String),

    #[error("invalid CPC code `{raw}`: {field} {reason}")]
    CpcParse {
        raw: String,
        field: &'static str,
        reason: &'static str,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {reason}")]
    MalformedRow {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("duplicate patent id `{0}`")]
    DuplicatePatent(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("training error: {0}")]
    Training(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
