use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (asymmetry {0:e})")]
    NotHermitian(f64),
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("matrix is not positive semidefinite (smallest eigenvalue {0:e})")]
    NotPsd(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid order {0}")]
    InvalidOrder(f64),
    #[error("not a density operator: {0}")]
    NotState(String),
    #[error("channel is not trace preserving (residual {0:e})")]
    NotTracePreserving(f64),
    #[error("{count} Kraus operators exceed the environment dimension {limit}")]
    TooManyKraus { count: usize, limit: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),
    #[error("support condition violated: {0}")]
    SupportViolation(String),
    #[error("epsilon must be nonnegative, got {0}")]
    NegativeEpsilon(f64),
    #[error("channel output is numerically zero")]
    DegenerateChannelOutput,
    #[error("purification alignment failed (residual {0:e})")]
    AlignmentFailure(f64),
    #[error("tolerance not met: error estimate {estimate:e} exceeds {tol:e}")]
    ToleranceNotMet { estimate: f64, tol: f64 },
    #[error("solver reached the iteration limit ({0})")]
    MaxIterations(usize),
    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),
    #[error("bracket violated: F_opt = {opt}, F_petz = {petz}")]
    BracketViolated { opt: f64, petz: f64 },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid value for `{field}`: {message}")]
    Validation { field: String, message: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
