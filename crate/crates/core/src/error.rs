use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the pattern-learning pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("sentence {sent_id}: {message}")]
    Tree { sent_id: String, message: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("cannot merge {left} table with {right} table")]
    UnitKindMismatch { left: String, right: String },

    #[error("length mismatch: {predictions} predictions vs {gold} gold labels")]
    LengthMismatch { predictions: usize, gold: usize },

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn tree(sent_id: &str, message: impl Into<String>) -> Self {
        Error::Tree {
            sent_id: sent_id.to_string(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(context: impl Into<String>, source: serde_json::Error) -> Self {
        Error::Json {
            context: context.into(),
            source,
        }
    }
}
