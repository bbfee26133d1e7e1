use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid search space: {0}")]
    InvalidSpace(String),

    #[error("segment [{start}, {end}) mixes alphabet sizes or identity symbols")]
    HeterogeneousSegment { start: usize, end: usize },

    #[error("architecture count overflows 128 bits")]
    CountOverflow,

    #[error("no trivial net: position {0} has no identity option")]
    NoTrivialNet(usize),

    #[error("invalid genotype: {0}")]
    InvalidGenotype(String),

    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },

    #[error("conflicting records for architecture {key}: {msg}")]
    ConflictingRecords { key: String, msg: String },

    #[error("architecture {0} is missing from a complete table")]
    MissingArchitecture(String),

    #[error("operation requires a complete table")]
    IncompleteTable,

    #[error("space has {0} architectures, too many to enumerate")]
    SpaceTooLarge(u128),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }
}
