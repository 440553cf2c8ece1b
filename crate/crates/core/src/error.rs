use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}: parse error at line {line}, field `{field}`: {message}")]
    Parse {
        path: String,
        line: usize,
        field: String,
        message: String,
    },

    #[error("{path}: unsupported {what} schema version {found} (expected {expected})")]
    SchemaVersion {
        path: String,
        what: &'static str,
        expected: u32,
        found: u64,
    },

    #[error("simplex stalled after {iterations} iterations")]
    Stalled { iterations: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("empty dataset: {0}")]
    EmptyDataset(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("determinism violation: {0}")]
    Determinism(String),

    #[error("missing model: {0}")]
    MissingModel(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
