use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid clustering: {0}")]
    InvalidClustering(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("index {index} out of range for {len} observations")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("degenerate rate-distortion hull: {0}")]
    DegenerateHull(String),

    #[error("no clustering left to test: {0}")]
    EmptyTestedSet(String),

    #[error("hull segment {segment} is not usable (slope {kappa} is not negative)")]
    IncreasingSegment { segment: usize, kappa: f64 },

    #[error("modified clustering has zero entropy")]
    ZeroEntropy,

    #[error("no perturbation changes the entropy-distortion pair: {0}")]
    NoPerturbation(String),

    #[error("{0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for conditions where the input is well-formed but the hull math
    /// cannot proceed (the CLI reports these with exit code 3).
    pub fn is_degenerate(&self) -> bool {
        matches!(
            self,
            Error::DegenerateHull(_)
                | Error::EmptyTestedSet(_)
                | Error::IncreasingSegment { .. }
                | Error::ZeroEntropy
                | Error::NoPerturbation(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
