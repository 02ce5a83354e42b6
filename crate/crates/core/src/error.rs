use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error in field `{field}`: {message}")]
    Parse { field: String, message: String },

    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    #[error("unsupported shape: {0}")]
    UnsupportedShape(String),

    #[error("invalid value: {0}")]
    Validation(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("index {index} out of range (len {len})")]
    Index { index: usize, len: usize },

    #[error("certification impossible: S = {samples} must exceed 2d = {}; raise the number of samples", 2 * .degree)]
    CertificationImpossible { degree: usize, samples: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("operator too large to materialize ({entries} entries > {limit}); use the matrix-free power method instead")]
    TooLarge { entries: usize, limit: usize },

    #[error("i/o error on {}: {source}", path.display())]
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
