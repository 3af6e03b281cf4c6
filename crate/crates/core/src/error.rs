use crate::arith::ArithError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error("edge ({r},{c}) is outside a diamond of order {order}")]
    InvalidEdge { order: usize, r: usize, c: usize },
    #[error("cell ({r},{c}) at order {level} has a zero cell factor")]
    ZeroCellFactor { level: usize, r: usize, c: usize },
    #[error("zero weight where a nonzero weight is required: {0}")]
    ZeroWeight(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid matching: {0}")]
    InvalidMatching(String),
    #[error("graph too large for brute force: {vertices} vertices (limit {limit})")]
    TooLarge { vertices: usize, limit: usize },
    #[error("graph has no matching of positive weight")]
    NoMatching,
}

impl Error {
    /// Stable machine-readable name of the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Arith(ArithError::DivisionByZero) => "DivisionByZero",
            Error::Arith(ArithError::PoleAtZero) => "PoleAtZero",
            Error::Arith(ArithError::PrecisionExhausted) => "PrecisionExhausted",
            Error::Arith(ArithError::Parse(_)) => "ParseError",
            Error::InvalidEdge { .. } => "InvalidEdge",
            Error::ZeroCellFactor { .. } => "ZeroCellFactor",
            Error::ZeroWeight(_) => "ZeroWeight",
            Error::InvalidInput(_) => "InvalidInput",
            Error::InvalidMatching(_) => "InvalidMatching",
            Error::TooLarge { .. } => "TooLarge",
            Error::NoMatching => "NoMatching",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
