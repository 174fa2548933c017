use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not a prime modulus")]
    InvalidField(u32),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("point outside the box: {0}")]
    OutOfBox(String),
    #[error("not an interval: {0}")]
    NotInterval(String),
    #[error("map is not monotone: {0}")]
    NonMonotone(String),
    #[error("sections and cosections need a nonempty index set")]
    EmptySet,
    #[error("invalid module: {0}")]
    InvalidModule(String),
    #[error("modules live on different bases: {0}")]
    BaseMismatch(String),
    #[error("window exceeds the safe evaluation range on axis {axis} ({side} side): requested {requested}, safe limit {limit}")]
    WindowOutsideSafeRange {
        axis: usize,
        side: &'static str,
        requested: i64,
        limit: i64,
    },
    #[error("resolution did not terminate within {0} terms")]
    ResolutionCapExceeded(usize),
    #[error("unsupported case: {0}")]
    Unsupported(String),
    #[error("search space too large: {0}")]
    SearchTooLarge(String),
    #[error("complexes with nonzero differentials are not supported: no algorithm for the convolution distance is known in that regime")]
    NonzeroDifferential,
    #[error("invalid complex: {0}")]
    InvalidComplex(String),
    #[error("invalid input: {0}")]
    Schema(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
