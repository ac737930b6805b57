use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("scalar {0} lies outside [0,1]")]
    ScalarRange(String),

    #[error("unknown scalar name `{0}`")]
    UnknownScalar(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("coordinate {0} lies outside [0,1]")]
    CoordinateOutOfRange(String),

    #[error("dimension {0} is outside the supported range 0..={max}", max = crate::geometry::MAX_DIM)]
    UnsupportedDimension(usize),

    #[error("cell count {cells} exceeds the cap of {cap}")]
    CellCap { cells: usize, cap: usize },

    #[error("operation requires exact (rational-scalar) input: {0}")]
    NotExact(String),

    #[error("cannot narrow presentation class from {from} to {to}")]
    Narrowing { from: String, to: String },

    #[error("invalid approximant: {0}")]
    InvalidApproximant(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn internal(msg: impl Into<String>) -> Self {
        Error::Internal(msg.into())
    }
}
