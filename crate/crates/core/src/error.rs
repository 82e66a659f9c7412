use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    MalformedRecord { line: usize, message: String },

    #[error("duplicate user id `{0}`")]
    DuplicateUser(String),

    #[error("invalid lexicon: {0}")]
    Lexicon(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("{0}")]
    Model(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
