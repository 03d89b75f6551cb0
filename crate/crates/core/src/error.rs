use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QrcError {
    #[error("matrix is not Hermitian (max |m - m^dagger| = {0:e})")]
    NotHermitian(f64),

    #[error("invalid qubit subset {subset:?} for {n_qubits} qubits")]
    BadSubset { subset: Vec<usize>, n_qubits: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("input value {0} outside [0, 1]")]
    InputOutOfRange(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("coupling draw degenerate after {0} attempts")]
    DegenerateDraw(u32),

    #[error("state lost positivity: min eigenvalue {0:e}")]
    PositivityViolation(f64),

    #[error("state lost unit trace: trace {0}")]
    TraceViolation(f64),

    #[error("trajectory too short: {points} points, need at least {needed}")]
    TooFewPoints { points: usize, needed: usize },

    #[error("readout system is ill-conditioned (effective rank {0})")]
    IllConditioned(usize),

    #[error("eigendecomposition did not converge")]
    NoConvergence,

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
}

pub type Result<T> = std::result::Result<T, QrcError>;
