use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: header mismatch at column {column}: expected `{expected}`, found `{found}`")]
    HeaderMismatch {
        path: PathBuf,
        column: usize,
        expected: String,
        found: String,
    },

    #[error("{path}: row {row}, column {column}: {message}")]
    Parse {
        path: PathBuf,
        row: usize,
        column: usize,
        message: String,
    },

    #[error("invalid label {value} (expected 1 or -1)")]
    InvalidLabel { value: String },

    #[error("feature `{feature}` has zero variance")]
    ZeroVariance { feature: &'static str },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("dataset has {have} samples, need at least {need}")]
    TooFewSamples { have: usize, need: usize },

    #[error("training data contains a single class")]
    SingleClass,

    #[error("{0}")]
    Train(#[from] crate::svm::TrainError),

    #[error("infeasible generator config: {0}")]
    Infeasible(String),

    #[error("model file {path}: {message}")]
    Schema { path: PathBuf, message: String },

    #[error("insufficient source data: {0}")]
    Insufficient(String),

    #[error("undefined metric: {0}")]
    Undefined(&'static str),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
