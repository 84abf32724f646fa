use std::path::PathBuf;

use crate::graph::{ChunkId, TagId};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("tag is empty after normalization")]
    EmptyTag,

    #[error("unknown tag id {0}")]
    UnknownTag(TagId),

    #[error("invalid tag pair ({0}, {0}): self-pairs have no edge")]
    InvalidPair(TagId),

    #[error("chunk {0} has already been recorded")]
    DuplicateChunk(ChunkId),

    #[error("document {0:?} has already been ingested")]
    DuplicateDocument(String),

    #[error("document {0:?} contains no text")]
    EmptyDocument(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("tagger unavailable: {0}")]
    TaggerUnavailable(String),

    #[error("no tags found")]
    NoTagsFound,

    #[error("none of the query terms are known to the graph")]
    NoKnownTags,

    #[error("corrupt snapshot: {0}")]
    CorruptSnapshot(String),

    #[error("unsupported snapshot format version {found} (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("parse error in {record}: {message}")]
    Parse { record: String, message: String },

    #[error("I/O error on {path}: {source}")]
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

    pub(crate) fn parse(record: impl Into<String>, message: impl std::fmt::Display) -> Self {
        Error::Parse {
            record: record.into(),
            message: message.to_string(),
        }
    }
}
