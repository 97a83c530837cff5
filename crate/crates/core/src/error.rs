use thiserror::Error;

/// Crate-wide error type. Every fallible operation returns one of these
/// variants rather than panicking; panics are reserved for internal logic
/// bugs (indexing mistakes), never for bad caller input.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied argument violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Matrix/batch dimensions are inconsistent with each other.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A matrix that must be positive definite failed its Cholesky check.
    #[error("matrix not positive definite: {0}")]
    NotPositiveDefinite(String),

    /// A linear system could not be solved (rank-deficient operator).
    #[error("singular system: {0}")]
    Singular(String),

    /// A numerical routine could not reach its requested accuracy. The
    /// achieved error estimate is carried so callers can decide whether the
    /// partial result is usable.
    #[error("{what}: achieved error {achieved:.3e} exceeds target {required:.3e}")]
    Numerical {
        what: String,
        achieved: f64,
        required: f64,
    },

    /// An iterative solver hit its iteration cap before meeting its
    /// stopping rule. Carries the last residual for diagnosis.
    #[error("{what}: no convergence after {iterations} iterations (residual {residual:.3e})")]
    Convergence {
        what: String,
        iterations: usize,
        residual: f64,
    },

    /// A CSV or config file could not be parsed. Locations are 1-based.
    #[error("parse error in {path} at row {row}, column {col}: {msg}")]
    Parse {
        path: String,
        row: usize,
        col: usize,
        msg: String,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI. Runtime failures exit 1; usage errors
    /// (malformed invocations) are handled by the argument parser, which
    /// exits 2 before any of these variants can arise.
    pub fn exit_code(&self) -> i32 {
        1
    }
}
