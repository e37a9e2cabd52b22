use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised anywhere in the fitting, scoring and evaluation pipeline.
///
/// The display form leads with a stable error name so command-line users
/// (and scripts grepping stderr) can tell failure classes apart.
#[derive(Debug, Error)]
pub enum Error {
    #[error("DimensionMismatch: expected {expected} features, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("EmptyInput: {0}")]
    EmptyInput(&'static str),

    #[error("DegenerateKernelError: no eigenvalue of the centered Gram matrix exceeds the floor (largest = {largest:e})")]
    DegenerateKernel { largest: f64 },

    #[error("InvalidKError: k = {k} is outside [1, {n}]")]
    InvalidK { k: usize, n: usize },

    #[error("DegenerateDirectionsError: no usable projection direction could be generated")]
    DegenerateDirections,

    #[error("StratificationError: {0}")]
    Stratification(String),

    #[error("SingleClassError: ROC AUC needs both inliers and outliers")]
    SingleClass,

    #[error("InvalidParameter: {0}")]
    InvalidParameter(String),

    #[error("ParseError: {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("ModelFormatError: {0}")]
    ModelFormat(String),

    #[error("IoError: {path}: {source}")]
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

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}
