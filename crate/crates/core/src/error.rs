use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the engine.
#[derive(Debug, Error)]
pub enum NnaError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("data file not found: {0}")]
    MissingPath(PathBuf),

    #[error("bad magic number in {what}: expected {expected:#010x}, found {found:#010x}")]
    BadMagic {
        what: &'static str,
        expected: u32,
        found: u32,
    },

    #[error("truncated {what}: need {needed} bytes, have {available}")]
    Truncated {
        what: &'static str,
        needed: usize,
        available: usize,
    },

    #[error("image/label count mismatch: {images} images vs {labels} labels")]
    CountMismatch { images: usize, labels: usize },

    #[error("unsupported feature file version {0}")]
    UnsupportedVersion(u32),

    #[error("truncated payload: header declares {declared} samples, payload holds {actual}")]
    TruncatedPayload { declared: usize, actual: usize },

    #[error("trailing bytes after payload: {0}")]
    TrailingBytes(usize),

    #[error("non-finite feature value at sample {sample}, index {index}")]
    NonFinite { sample: usize, index: usize },

    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("class {0} appears in more than one task")]
    OverlappingTasks(usize),

    #[error("task {0} has no classes or no training samples")]
    EmptyTask(usize),

    #[error("holdout of {holdout} samples needs a training set larger than {available}")]
    HoldoutTooLarge { holdout: usize, available: usize },

    #[error("empty test set")]
    EmptyTestSet,

    #[error("{0}")]
    Degenerate(String),

    #[error("malformed {what}: {detail}")]
    Malformed { what: &'static str, detail: String },

    #[error("serialization error: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, NnaError>;

impl NnaError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            NnaError::MissingPath(path)
        } else {
            NnaError::Io { path, source }
        }
    }

    /// Process exit code for this error: 2 for usage/config/data-location
    /// problems, 1 for everything that went wrong at runtime.
    pub fn exit_code(&self) -> i32 {
        match self {
            NnaError::MissingPath(_) | NnaError::InvalidConfig(_) | NnaError::OverlappingTasks(_) => 2,
            _ => 1,
        }
    }
}
