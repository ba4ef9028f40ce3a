use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed document: {0}")]
    Format(String),

    #[error("condition mismatch: {0}")]
    ConditionMismatch(String),

    #[error("unknown reference: {0}")]
    UnknownReference(String),

    #[error("invalid suite: {0}")]
    InvalidSuite(String),

    #[error("alignment failure in {sentence}: {detail}")]
    Alignment { sentence: String, detail: String },

    #[error("missing entry: {0}")]
    MissingEntry(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("rank-deficient design matrix ({columns} columns)")]
    RankDeficient { columns: usize },

    #[error("degenerate sample: {0}")]
    Degenerate(String),

    #[error("empty cell: {0}")]
    EmptyCell(String),

    #[error("generation failed at position {position}: {detail}")]
    Generation { position: usize, detail: String },

    #[error("materials hash mismatch: {0}")]
    HashMismatch(String),

    #[error("duplicate upload id {0} with different content")]
    DuplicateUpload(String),

    #[error("schema violation: {0}")]
    Schema(String),
}

impl Error {
    /// Short stable identifier, used for single-line machine-readable error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Format(_) => "format",
            Error::ConditionMismatch(_) => "condition_mismatch",
            Error::UnknownReference(_) => "unknown_reference",
            Error::InvalidSuite(_) => "invalid_suite",
            Error::Alignment { .. } => "alignment",
            Error::MissingEntry(_) => "missing_entry",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::InsufficientData(_) => "insufficient_data",
            Error::RankDeficient { .. } => "rank_deficient",
            Error::Degenerate(_) => "degenerate",
            Error::EmptyCell(_) => "empty_cell",
            Error::Generation { .. } => "generation",
            Error::HashMismatch(_) => "hash_mismatch",
            Error::DuplicateUpload(_) => "duplicate_upload",
            Error::Schema(_) => "schema",
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Format(e.to_string())
    }
}
