use thiserror::Error;

/// Errors produced by POVM validation, frame construction and estimation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("operator entries are not {0}x{0}")]
    NotSquare(usize),

    #[error("operator list is empty")]
    EmptyOperatorList,

    #[error("matrix is not Hermitian (max asymmetry {max_deviation:.3e})")]
    NotHermitian { max_deviation: f64 },

    #[error("effect {index} is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { index: usize, min_eigenvalue: f64 },

    #[error("effects do not sum to the identity (residual {residual:.3e})")]
    NotComplete { residual: f64 },

    #[error("POVM has no effects")]
    EmptyPovm,

    #[error("singular value decomposition failed: {0}")]
    SvdFailure(String),

    #[error("retained singular value {index} below rank cutoff ({value:.3e})")]
    SingularSigma { index: usize, value: f64 },

    #[error("observable lies outside the measurement span (residual {residual:.3e})")]
    ObservableOutsideSpan { residual: f64 },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("not a valid quantum state: {reason}")]
    InvalidState { reason: String },

    #[error("outcome probabilities deviate from unit total by {deviation:.3e}")]
    ProbabilityLeak { deviation: f64 },

    #[error("histogram has no counts")]
    EmptyHistogram,

    #[error("composite dimension {dim} exceeds the dense-construction cap {cap}")]
    DimTooLarge { dim: usize, cap: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
