use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed corpus, rule, or spec text.
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// A GR line that does not resolve to chunk heads.
    #[error("line {line}: annotation error: {msg}")]
    Annotation { line: usize, msg: String },

    #[error("instance base is empty")]
    EmptyBase,

    #[error("arity mismatch: expected {expected} values, got {found}")]
    Arity { expected: usize, found: usize },

    #[error("position {0} holds a set-valued attribute, which an instance base cannot store")]
    SetValued(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
