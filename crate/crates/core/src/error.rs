use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left_width}x{left_height} vs {right_width}x{right_height}")]
    DimensionMismatch {
        left_width: usize,
        left_height: usize,
        right_width: usize,
        right_height: usize,
    },

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The patch geometry cannot be realised on an image of the given size.
    #[error("infeasible geometry: {0}")]
    InfeasibleGeometry(String),

    #[error(
        "position ({row}, {col}) out of bounds for patch side {side} in a {width}x{height} image"
    )]
    OutOfBounds {
        row: usize,
        col: usize,
        side: usize,
        width: usize,
        height: usize,
    },

    #[error("non-finite matrix entry")]
    NonFinite,

    #[error("aggregation buffer has no contribution at pixel ({row}, {col})")]
    Coverage { row: usize, col: usize },

    #[error(transparent)]
    Pnm(#[from] PnmError),
}

/// Failures while decoding or encoding PGM files.
#[derive(Debug, Error)]
pub enum PnmError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unsupported magic number {0:?} (expected P2 or P5)")]
    BadMagic(String),
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("unsupported maxval {0} (only 255 is accepted)")]
    UnsupportedMaxval(u32),
    #[error("truncated pixel data: expected {expected} samples, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("sample value {0} exceeds maxval")]
    SampleRange(u32),
}

impl PnmError {
    /// Stable numeric code for each failure class.
    pub fn code(&self) -> u8 {
        match self {
            PnmError::Io { .. } => 10,
            PnmError::BadMagic(_) => 11,
            PnmError::MalformedHeader(_) => 12,
            PnmError::UnsupportedMaxval(_) => 13,
            PnmError::Truncated { .. } => 14,
            PnmError::SampleRange(_) => 15,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
