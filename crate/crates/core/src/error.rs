use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failures raised by the library.
///
/// Variants are grouped so a front end can map them to exit statuses:
/// parameter problems, malformed data, and numerical non-convergence.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("empty input")]
    Empty,

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error(transparent)]
    Format(#[from] FormatError),

    #[error("power iteration did not converge after {iterations} iterations (last relative change {last_change:e})")]
    NotConverged {
        iterations: usize,
        last_change: f64,
        /// Best Rayleigh-quotient estimate of the dominant eigenvalue at exit.
        best_estimate: f64,
    },

    #[error("zero-norm input")]
    ZeroNorm,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Decoding errors for the on-disk tensor and quantized-vector formats.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormatError {
    #[error("bad magic: expected {expected:?}")]
    BadMagic { expected: &'static str },

    #[error("truncated input: needed {needed} bytes, have {available}")]
    Truncated { needed: usize, available: usize },

    #[error("unsupported rank {0} (expected 1 or 2)")]
    UnsupportedRank(u32),

    #[error("zero-sized dimension")]
    ZeroDimension,

    #[error("dimension overflow")]
    DimensionOverflow,

    #[error("non-finite value at index {index}")]
    NonFiniteValue { index: usize },

    #[error("{0} trailing bytes after payload")]
    TrailingBytes(usize),

    #[error("unsupported bit count {0}")]
    UnsupportedBits(u32),

    #[error("non-zero padding bits in plane {plane}")]
    DirtyPadding { plane: usize },

    #[error("malformed csv field {field}: {token:?}")]
    BadCsvField { field: usize, token: String },

    #[error("csv input is empty")]
    EmptyCsv,

    #[error("input is not valid utf-8")]
    NotUtf8,

    #[error("expected a {expected} tensor")]
    WrongShape { expected: &'static str },
}
