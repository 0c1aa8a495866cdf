use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not unitary: defect {defect:.3e} exceeds tolerance {tolerance:.3e}")]
    NotUnitary { defect: f64, tolerance: f64 },

    #[error("dimension mismatch: expected {expected}, got {got} ({context})")]
    DimensionMismatch {
        expected: usize,
        got: usize,
        context: &'static str,
    },

    #[error("{what} of dimension {dim} exceeds the cost limit {limit}")]
    CostLimit {
        what: &'static str,
        dim: usize,
        limit: usize,
    },

    #[error("hafnian requires an even dimension, got {0}")]
    OddDimension(usize),

    #[error("precondition violated: {0}")]
    Contract(String),

    #[error("mode {mode} is non-classical (v_p = {v_p}); no non-negative P function exists")]
    NonClassical { mode: usize, v_p: f64 },

    #[error("numerical check failed: {0}")]
    Numerical(String),

    #[error("matrix is not Hermitian: defect {0:.3e}")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite: eigenvalue {0:.6e}")]
    NotPsd(f64),

    #[error("fock cutoff: {0}")]
    Cutoff(String),

    #[error("config error at {path}: {message}")]
    Config { path: String, message: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 for cost-limit errors, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::CostLimit { .. } => 2,
            _ => 1,
        }
    }

    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}
