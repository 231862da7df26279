use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("corpus produced an empty vocabulary (min_count = {min_count})")]
    EmptyVocabulary { min_count: u64 },

    #[error("word not in vocabulary: {0:?}")]
    WordNotFound(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("non-finite value in parameter update (row {row})")]
    NonFiniteUpdate { row: usize },

    #[error("non-finite parameter detected during training after {pairs} pairs")]
    NonFiniteParameter { pairs: u64 },

    #[error("{path}:{line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
