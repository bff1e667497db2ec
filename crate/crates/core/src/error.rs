use alloc::string::String;

/// Errors raised by the operator algebra, Floquet analysis, and dynamics.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("operator is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("`{name}` = {value} is outside the domain of this operation")]
    Domain { name: &'static str, value: f64 },

    #[error("matrix exponential overflowed")]
    Overflow,

    #[error("eigendecomposition did not converge")]
    NoConvergence,

    #[error("frequency {omega} outside tabulated range [{lo}, {hi}]")]
    Extrapolation { omega: f64, lo: f64, hi: f64 },

    #[error("spectral density ratio undefined at omega = {0}")]
    UndefinedRatio(f64),

    #[error("frame not supported: {0}")]
    UnsupportedFrame(String),

    #[error("parameter regime not supported: {0}")]
    UnsupportedRegime(String),

    #[error("harmonic series truncation failed: {0}")]
    Truncation(String),

    #[error("integration step {dt:e} exceeds stability limit {limit:e}")]
    StepTooLarge { dt: f64, limit: f64 },

    #[error("inconsistent measurement data: {0}")]
    InconsistentData(String),

    #[error("no root bracket: {0}")]
    OutOfRange(String),
}

pub type Result<T> = core::result::Result<T, Error>;
