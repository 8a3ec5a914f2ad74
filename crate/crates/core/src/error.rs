use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("empty window")]
    EmptyWindow,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("insufficient horizon: {0}")]
    InsufficientHorizon(String),

    #[error("substitution: {0}")]
    Substitution(String),

    #[error("{axes} splitting axes exceed the exact-search limit of {limit}; use greedy mode")]
    AxisLimit { axes: usize, limit: usize },

    #[error("point not covered by castle: {0}")]
    NotCovered(String),

    #[error("point lies in more than one castle level: {0}")]
    Ambiguous(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("the symbolic coding path requires a coding of Y")]
    MissingCoding,

    #[error("empty cover")]
    EmptyCover,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
