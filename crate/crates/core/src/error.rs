use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("mode {mode} out of range for a tensor with {order} modes")]
    ModeOutOfRange { mode: usize, order: usize },

    #[error("mode {0} appears more than once")]
    DuplicateMode(usize),

    #[error("rank {rank} out of range: {reason}")]
    RankOutOfRange { rank: usize, reason: String },

    #[error("non-finite value at flat index {0}")]
    NonFinite(usize),

    #[error("matrix is not orthonormal (||Q^T Q - I||_F = {0:e})")]
    NotOrthonormal(f64),

    #[error("rank deficient: smallest R diagonal {diag:e} <= {threshold:e}")]
    RankDeficient { diag: f64, threshold: f64 },

    #[error("svd did not converge after {0} sweeps")]
    NoConvergence(usize),

    #[error("factor is not a leading basis (||Z^T Y||_F^2 = {got}, expected {expected})")]
    NotInSolutionSet { got: f64, expected: f64 },

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("bad magic")]
    BadMagic,

    #[error("truncated payload")]
    TruncatedPayload,

    #[error("shape overflow")]
    ShapeOverflow,

    #[error("malformed file: {0}")]
    Malformed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
