use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("point {0} lies outside [0, 1]")]
    OutOfDomain(String),
    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("sequence is too short")]
    EmptySequence,
    #[error("cannot parse number {0:?}")]
    Parse(String),
    #[error("no preimage found: {0}")]
    NotFound(String),
    #[error("live pieces exceeded the cap of {0}")]
    PieceExplosion(usize),
    #[error("epsilon too large: {0} violated")]
    EpsilonTooLarge(String),
    #[error("wrong case: {0}")]
    WrongCase(String),
    #[error("map is not transitive")]
    NotTransitive,
    #[error("transitivity undecided within the guard band")]
    TransitivityUncertain,
    #[error("no witness construction applies: {0}")]
    NoWitness(String),
    #[error("invariant hull did not stabilize after {0} rounds")]
    NoStabilization(usize),
    #[error("map is transitive; nothing to renormalize")]
    IsTransitive,
    #[error("verification failed: {0}")]
    VerificationFailed(String),
    #[error("renormalization depth cap of {0} exceeded")]
    DepthExceeded(usize),
    #[error("point {0} lies outside the renormalization interval")]
    PointOutsideJ(String),
}

impl Error {
    /// Stable machine-readable name.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParams(_) => "InvalidParams",
            Error::InvalidMap(_) => "InvalidMap",
            Error::OutOfDomain(_) => "OutOfDomain",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::EmptySequence => "EmptySequence",
            Error::Parse(_) => "Parse",
            Error::NotFound(_) => "NotFound",
            Error::PieceExplosion(_) => "PieceExplosion",
            Error::EpsilonTooLarge(_) => "EpsilonTooLarge",
            Error::WrongCase(_) => "WrongCase",
            Error::NotTransitive => "NotTransitive",
            Error::TransitivityUncertain => "TransitivityUncertain",
            Error::NoWitness(_) => "NoWitness",
            Error::NoStabilization(_) => "NoStabilization",
            Error::IsTransitive => "IsTransitive",
            Error::VerificationFailed(_) => "VerificationFailed",
            Error::DepthExceeded(_) => "DepthExceeded",
            Error::PointOutsideJ(_) => "PointOutsideJ",
        }
    }
}
