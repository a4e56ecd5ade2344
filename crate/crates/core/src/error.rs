use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: max |M - M^dagger| = {deviation:e}")]
    NotHermitian { deviation: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invariant `{invariant}` violated: {detail}")]
    Invariant { invariant: &'static str, detail: String },

    #[error("support violation: {0}")]
    SupportViolation(String),

    #[error("dimension cap exceeded: requires {required}, cap is {cap}")]
    DimensionCap { required: usize, cap: usize },

    #[error("protocol error {observed:e} exceeds bound {bound:e}")]
    ErrorBoundViolated { observed: f64, bound: f64 },

    #[error("degenerate guess: a = {a} (guess orthogonal to the accepting subspace)")]
    DegenerateGuess { a: f64 },

    #[error("update not triggered: a = {a:e} below trigger {trigger:e}")]
    BelowTrigger { a: f64, trigger: f64 },

    #[error("internal consistency failure at x={x}, y={y}: {detail}")]
    Consistency { x: usize, y: usize, detail: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {residual:e})")]
    NoConvergence { sweeps: usize, residual: f64 },
}

impl Error {
    pub(crate) fn invariant(invariant: &'static str, detail: impl Into<String>) -> Self {
        Error::Invariant { invariant, detail: detail.into() }
    }
}
