use thiserror::Error;

/// Everything that can go wrong in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (relative deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("not a valid state: {0}")]
    NotAState(String),
    #[error("filter succeeds with zero probability")]
    ZeroProbability,
    #[error("invalid instrument: {0}")]
    InvalidInstrument(String),
    #[error("spectrum condition fails (max deviation {0:.3e})")]
    SpectrumMismatch(f64),
    #[error("operator is not swap-symmetric (residual {0:.3e})")]
    NotSymmetric(f64),
    #[error("wrong rank: expected {expected}, found {found}")]
    WrongRank { expected: String, found: usize },
    #[error("condition unsatisfied: {0}")]
    ConditionUnsatisfied(String),
    #[error("parameters are not in canonical form: {0}")]
    NotCanonical(String),
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("problem too large: d_A * d_B^2 = {0} exceeds 1024")]
    TooLarge(usize),
    #[error("wrong dimension: {0}")]
    WrongDimension(String),
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("not a Choi state: {0}")]
    NotAChoiState(String),
    #[error("not a symmetric extension: {0}")]
    NotAnExtension(String),
}

pub type Result<T> = std::result::Result<T, Error>;
