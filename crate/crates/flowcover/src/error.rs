use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite state reached while integrating `{system}` (sample index {index})")]
    NonFiniteState { system: String, index: usize },

    #[error("unknown system `{name}`; valid names: {valid}")]
    UnknownSystem { name: String, valid: String },

    #[error("point escaped the grid domain at {coords:?}")]
    Escaped { coords: Vec<f64> },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("set-valued maps live on different spaces")]
    SpaceMismatch,

    #[error("grids differ between operands")]
    GridMismatch,

    #[error("input box set is empty")]
    EmptyInput,

    #[error("every member of the input escaped the domain")]
    EscapeDominated,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
