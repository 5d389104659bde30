use thiserror::Error;

/// Errors produced by the integration toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("polylog order {0} outside supported range 1..={max}", max = crate::polylog::MAX_ORDER)]
    OrderOutOfRange(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid shape: {0}")]
    Shape(String),

    #[error("degenerate box: dimension {0} has zero or negative width")]
    DegenerateBox(usize),

    #[error("box leaves the normalized domain [-1, 1] in dimension {0}")]
    OutsideDomain(usize),

    #[error("invalid index set: {0}")]
    IndexSet(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown integrand family `{0}`")]
    UnknownFamily(String),

    #[error("weight file: {0}")]
    WeightFile(String),

    #[error(transparent)]
    Json(#[from] JsonError),
}

/// Wrapper so that `Error` stays `Clone + PartialEq`.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("{0}")]
pub struct JsonError(pub String);

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(JsonError(e.to_string()))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
