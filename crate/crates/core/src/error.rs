use std::path::PathBuf;

/// Errors produced by the decomposition library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("image dimensions {height}x{width} too small: both axes need at least 2 samples")]
    DimensionTooSmall { height: usize, width: usize },

    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("data length {got} does not match {height}x{width}x3")]
    DataLength {
        height: usize,
        width: usize,
        got: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("spectral kernel was built for a different shape or parameter set")]
    KernelMismatch,

    #[error("file not found: {}", .0.display())]
    NotFound(PathBuf),

    #[error("unsupported image format for {}", .0.display())]
    UnsupportedFormat(PathBuf),

    #[error("unsupported bit depth in {}: {kind}", path.display())]
    UnsupportedBitDepth { path: PathBuf, kind: String },

    #[error("failed to decode {}: {source}", path.display())]
    Decode {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("failed to write {}: {source}", path.display())]
    Write {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
