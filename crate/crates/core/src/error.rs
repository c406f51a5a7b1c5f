use thiserror::Error;

/// Errors raised by the clustering toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// `gradient` was asked for at a point where some data point sits on the
    /// bandwidth sphere; use the directional derivative there instead.
    #[error("point is non-smooth: data index {index} lies on the bandwidth boundary")]
    NonSmoothPoint { index: usize },

    #[error("unsupported size: {0}")]
    UnsupportedSize(String),

    /// A deflation round found a mode whose inlier ball claims no
    /// unclaimed point.
    #[error(
        "deflation stalled at round {round}: mode from seed {seed} claims no unclaimed points"
    )]
    AlgorithmStall { round: usize, seed: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
