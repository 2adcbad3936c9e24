use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the clustering pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("empty corpus under {0}")]
    EmptyCorpus(PathBuf),

    #[error("{file}:{line}: {msg}")]
    ParseLine {
        file: String,
        line: usize,
        msg: String,
    },

    #[error("sentence count mismatch for {doc_id}: document has {expected} sentences, parse file has {found}")]
    SentenceMismatch {
        doc_id: String,
        expected: usize,
        found: usize,
    },

    #[error("unknown document id '{0}'")]
    UnknownDocId(String),

    #[error("inconsistent constraints: {0}")]
    InconsistentConstraints(String),

    #[error("term '{0}' missing from corpus document frequencies")]
    MissingTerm(String),

    #[error("{0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
