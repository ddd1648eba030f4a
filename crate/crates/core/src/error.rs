use thiserror::Error;

/// Errors raised by the nearest-stable-pencil library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("size mismatch: expected {expected}, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("pencil is not upper triangular (strictly lower entry {max_lower:e} exceeds {bound:e})")]
    NotTriangular { max_lower: f64, bound: f64 },

    #[error("matrix {which} is not unitary (deviation {deviation:e})")]
    NotUnitary { which: &'static str, deviation: f64 },

    #[error("real pencil has nonzero imaginary part at ({row}, {col})")]
    NotReal { row: usize, col: usize },

    #[error("scalar pencil lies on the medial axis; projection is not differentiable there")]
    MedialAxis,

    #[error("rank-deficient factor during retraction")]
    RankDeficient,

    #[error("invalid solver options: {0}")]
    InvalidOptions(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("minimizer is not singular; nothing to regularize")]
    NotSingular,

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
