use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("srt block {block}, line {line}: {message}")]
    Srt {
        block: usize,
        line: usize,
        message: String,
    },

    #[error("invalid subtitle document: {0}")]
    Document(String),

    #[error("tagged text: {0}")]
    Tagged(String),

    #[error("matrix line {line}: {message}")]
    Matrix { line: usize, message: String },

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("vocab line {line}: {message}")]
    Vocab { line: usize, message: String },

    #[error("alignment: {0}")]
    Align(String),

    #[error("alignment is infeasible: {labels} labels ({required} frames required) but only {frames} frames")]
    Infeasible {
        labels: usize,
        required: usize,
        frames: usize,
    },

    #[error("evaluation: {0}")]
    Eval(String),

    #[error("embedding provider failed for block {block}: {source}")]
    Block {
        block: usize,
        #[source]
        source: ProviderError,
    },

    #[error(transparent)]
    Provider(#[from] ProviderError),

    #[error("synthetic fixture: {0}")]
    Synth(String),

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
}

/// Failures raised by an embedding provider.
#[derive(Debug, Error)]
pub enum ProviderError {
    #[error("no embedding for key {0:?}")]
    MissingKey(String),

    #[error("embeddings line {line}: {message}")]
    Load { line: usize, message: String },

    #[error("request to {url} failed: {message}")]
    Transport { url: String, message: String },

    #[error("{url} returned status {status}")]
    Status { url: String, status: u16 },

    #[error("protocol error from {url}: {message}")]
    Protocol { url: String, message: String },

    #[error("{0}")]
    Other(String),
}
