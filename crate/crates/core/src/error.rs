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

    #[error("unsupported image format in {path}: {reason}")]
    UnsupportedFormat { path: PathBuf, reason: String },

    #[error("png decode error in {path}: {source}")]
    Decode {
        path: PathBuf,
        #[source]
        source: png::DecodingError,
    },

    #[error("png encode error in {path}: {source}")]
    Encode {
        path: PathBuf,
        #[source]
        source: png::EncodingError,
    },

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("kernel size must be odd and positive, got {0}")]
    InvalidKernel(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("inconsistent padding: {0}")]
    InconsistentPadding(String),

    #[error("region out of bounds: {0}")]
    OutOfBounds(String),

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("degenerate metric input: {0}")]
    Degenerate(String),

    #[error("external inpainter failed: {0}")]
    ExternalProcess(String),

    #[error("external inpainter protocol violation: {0}")]
    ExternalProtocol(String),

    #[error("external inpainter modified kept pixel at ({x}, {y}) channel {channel}: {expected} -> {actual}")]
    KeptPixelViolation {
        x: usize,
        y: usize,
        channel: usize,
        expected: f64,
        actual: f64,
    },

    #[error("inpainting failed in phase {phase}: {source}")]
    Phase {
        phase: usize,
        #[source]
        source: Box<Error>,
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
