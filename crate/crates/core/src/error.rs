use thiserror::Error;

/// Errors produced by lattice construction, operator algebra, and audits.
///
/// `InvalidParameter` and `Incommensurate` are precondition violations the
/// caller can repair; `ToleranceFailure` signals that a numerical check did
/// not meet its stated residual bound and should never be downgraded.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("N={n} is incommensurate: N must be divisible by {divisor}; minimal valid N: {minimal}")]
    Incommensurate {
        n: usize,
        divisor: usize,
        minimal: usize,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("sign-projection zero guard: |diagonal value| = {value:e} < {guard:e} at grid site {index}; grid and parameters are incommensurate")]
    ZeroGuard {
        value: f64,
        index: usize,
        guard: f64,
    },

    #[error("numerical tolerance failure in {check}: residual {residual:e} exceeds {tolerance:e}")]
    ToleranceFailure {
        check: String,
        residual: f64,
        tolerance: f64,
    },

    #[error("operator is not diagonal in a single basis: {0}")]
    NotDiagonal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
