use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("invalid Pauli character {0:?}")]
    InvalidPauli(char),

    #[error("empty Pauli string")]
    EmptyPauli,

    #[error("invalid code parameters: {0}")]
    InvalidCode(String),

    #[error("code invariant violated: {0}")]
    InvariantViolation(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("estimate does not reproduce the syndrome ({mismatches} residual checks)")]
    ResidualSyndrome { mismatches: usize },

    #[error("rank deficiency: expected rank {expected}, found {actual}")]
    RankDeficient { expected: usize, actual: usize },

    #[error("syndrome is inconsistent with the check matrix")]
    InconsistentSyndrome,

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("value out of domain: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
