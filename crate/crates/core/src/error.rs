use thiserror::Error;

/// Errors raised by frame construction, measures and optimizers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrameError {
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("subset index {index} out of range for {m} vectors")]
    IndexOutOfRange { index: usize, m: usize },
    #[error("subset enumeration of {count} terms exceeds the cap of {cap}")]
    CapExceeded { count: u128, cap: usize },
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("matrix is singular (smallest eigenvalue {0:e})")]
    SingularMatrix(f64),
    #[error("frame vector {0} is (numerically) zero")]
    ZeroVector(usize),
    #[error("frame is not Parseval (|PP* - I|_F = {0:e})")]
    NotParseval(f64),
    #[error("rank mismatch: expected {expected}, found {found}")]
    RankMismatch { expected: usize, found: usize },
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("real frame has nonzero imaginary part at ({row}, {col})")]
    ImaginaryInRealFrame { row: usize, col: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unknown check `{0}`")]
    UnknownCheck(String),
    #[error("check not applicable: {0}")]
    NotApplicable(String),
}

pub type Result<T> = std::result::Result<T, FrameError>;
