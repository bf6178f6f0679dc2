use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors produced anywhere in the extraction, retrieval and evaluation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot decode image {path}: {message}")]
    ImageDecode { path: PathBuf, message: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("segmentation failed: {0}")]
    SegmentationFailed(String),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("degenerate texture: {0}")]
    DegenerateTexture(String),

    #[error("empty shape: polar transform has zero DC magnitude")]
    EmptyShape,

    #[error("vector length mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: usize, found: usize },

    #[error("NaN in distance input at position {0}")]
    NanInput(usize),

    #[error("index build failed: {0}")]
    Build(String),

    #[error("malformed index: {0}")]
    IndexFormat(String),

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("class `{class}` has {found} images, {needed} required")]
    InsufficientImages {
        class: String,
        needed: usize,
        found: usize,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Coarse classification used by front ends to pick exit statuses.
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Io { .. }
            | Error::InvalidInput(_)
            | Error::ShapeMismatch { .. }
            | Error::NanInput(_)
            | Error::Build(_)
            | Error::IndexFormat(_) => ErrorKind::Input,
            Error::ImageDecode { .. }
            | Error::SegmentationFailed(_)
            | Error::DegenerateGeometry(_)
            | Error::DegenerateTexture(_)
            | Error::EmptyShape => ErrorKind::ImageProcessing,
            Error::Evaluation(_) | Error::InsufficientImages { .. } => ErrorKind::Evaluation,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Input,
    ImageProcessing,
    Evaluation,
}
