use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error(
        "dimension mismatch: expected {expected_width}x{expected_height}, got {width}x{height}"
    )]
    DimensionMismatch {
        expected_width: usize,
        expected_height: usize,
        width: usize,
        height: usize,
    },

    #[error("region {0} lies outside the image")]
    InvalidRegion(String),

    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("image too small: {0}")]
    ImageTooSmall(String),

    #[error("pixels ({0}, {1}) and ({2}, {3}) are not 4-neighbors")]
    NotNeighbors(usize, usize, usize, usize),

    #[error("mask has no foreground pixels")]
    EmptyMask,

    #[error("shift {shift} must be smaller than the image width {width}")]
    InvalidShift { shift: usize, width: usize },

    #[error("dataset contains no records")]
    EmptyDataset,

    #[error("{context}: {message}")]
    Parse { context: String, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("map `{name}` failed: {source}")]
    Map {
        name: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("image codec error for {path:?}: {source}")]
    Codec {
        path: Option<PathBuf>,
        #[source]
        source: image::ImageError,
    },

    #[error("gif encoding failed: {0}")]
    Gif(#[from] gif::EncodingError),

    #[error("i/o error on {path:?}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            context: context.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
