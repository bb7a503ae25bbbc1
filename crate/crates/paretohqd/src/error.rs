//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed record at line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },

    #[error("duplicate id {id:?} at line {line}")]
    DuplicateId { id: String, line: usize },

    #[error("non-finite reward at line {line}")]
    NonFiniteReward { line: usize },

    #[error("reward arity mismatch at line {line}: expected {expected}, got {got}")]
    ArityMismatchAtLine {
        line: usize,
        expected: usize,
        got: usize,
    },

    #[error("reward arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("non-finite component in reward vector")]
    NonFiniteComponent,

    #[error("invalid preference vector: {0}")]
    InvalidPreference(String),

    #[error("invalid reward bounds: {0}")]
    InvalidBounds(String),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("example {id:?} has no reward vector")]
    UnscoredExample { id: String },

    #[error("objective count must be at least 2, got {0}")]
    TooFewObjectives(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("adapter error: {0}")]
    Adapter(String),

    #[error("adapter returned {got} rewards for example {id:?}, expected {expected}")]
    AdapterArity {
        id: String,
        expected: usize,
        got: usize,
    },

    #[error("undecodable response for example {id:?}")]
    UndecodableResponse { id: String },

    #[error("replay divergence at {artifact}: {detail}")]
    ReplayDivergence { artifact: String, detail: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
