use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("assignment has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("spin value {value} at position {index} is not -1 or +1")]
    InvalidSpin { index: usize, value: i8 },
    #[error("vertex or variable index {index} out of range for n = {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("cannot normalize a coupler set whose coefficients are all zero")]
    AllZeroCouplers,
    #[error("model has {n} variables, exact enumeration supports at most {max}")]
    TooLargeForEnumeration { n: usize, max: usize },
    #[error("no corrected constraint cached for n = {n} at {path}")]
    MissingConstraint { n: usize, path: PathBuf },
    #[error("malformed data: {0}")]
    Malformed(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
