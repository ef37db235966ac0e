use std::path::PathBuf;

/// Crate-wide result alias.
pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed PGM: {0}")]
    MalformedPgm(String),

    #[error("mask too small: {0}")]
    MaskTooSmall(String),

    #[error("empty mask")]
    EmptyMask,

    #[error("empty measurement band {0}")]
    EmptyBand(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape/data mismatch: {0}")]
    ShapeMismatch(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("unknown label {0:?}")]
    UnknownLabel(String),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("unsupported format version {found} (expected {expected})")]
    FormatVersion { found: u64, expected: u64 },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
