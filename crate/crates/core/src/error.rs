use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid with {entries} entries exceeds the limit of {limit}")]
    GridTooLarge { entries: u128, limit: usize },

    #[error("grid mismatch: N={left_n}, l={left_l} vs N={right_n}, l={right_l}")]
    GridMismatch {
        left_n: usize,
        left_l: usize,
        right_n: usize,
        right_l: usize,
    },

    #[error("axis {axis} out of range 1..={l}")]
    AxisOutOfRange { axis: usize, l: usize },

    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),

    #[error("invalid Riesz bounds A={lower}, B={upper}: need 0 < A <= B")]
    InvalidBounds { lower: f64, upper: f64 },

    #[error("at most one of the weights p, q may be infinite")]
    BothWeightsInfinite,

    #[error("scale must be positive and finite, got {0}")]
    InvalidScale(f64),

    #[error("dilation R={r} must satisfy 1 <= R < N/2 (N={n})")]
    InvalidDilation { r: usize, n: usize },

    #[error("Gram matrix of dimension {dim} exceeds the oracle limit {limit}")]
    GramTooLarge { dim: usize, limit: usize },

    #[error("eigensolver failed: {0}")]
    Eigen(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
