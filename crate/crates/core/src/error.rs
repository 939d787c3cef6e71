use std::io;
use std::path::Path;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },

    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("malformed treebank entry: {0}")]
    Transform(String),

    #[error("unknown label {0:?}")]
    UnknownLabel(String),

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("offset out of range: span ({i}, {j}) in sentence of length {n}")]
    Offset { i: usize, j: usize, n: usize },

    #[error("score file: {0}")]
    ScoreFile(String),

    #[error("cannot decode: {0}")]
    Decode(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("training diverged at epoch {epoch}, batch {batch}: loss {loss}")]
    Divergence { epoch: usize, batch: usize, loss: f64 },

    #[error("length mismatch: {0}")]
    Mismatch(String),

    #[error("config: {0}")]
    Config(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn io(path: &Path, source: io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
