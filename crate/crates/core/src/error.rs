use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed row {row}: {reason}")]
    MalformedRow { row: usize, reason: String },

    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("unknown language `{0}` (expected java, python or pharo)")]
    UnknownLanguage(String),

    #[error("frequencies undefined: {0}")]
    EmptyDataset(&'static str),

    #[error("rows mix languages {0} and {1}")]
    MixedLanguages(String, String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("length mismatch in {what}: expected {expected}, got {actual}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("class `{0}` has zero frequency; its inverse-frequency weight is undefined")]
    ZeroFrequency(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("catalog mismatch: {0}")]
    CatalogMismatch(String),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

impl Error {
    /// True for failures caused by non-finite values rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical(_))
    }
}
