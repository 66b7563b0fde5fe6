use thiserror::Error;

use crate::expr::ExprError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (max |M - M^dagger| = {0:.3e})")]
    NonHermitian(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("dimension {0} exceeds the dense limit")]
    DimensionTooLarge(usize),
    #[error("dimension too small: {0}")]
    DimensionTooSmall(String),
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid split: {0}")]
    InvalidSplit(String),
    #[error("parameter {value} outside [{min}, {max}]")]
    OutOfRange { value: f64, min: f64, max: f64 },
    #[error(transparent)]
    Expression(#[from] ExprError),
    #[error("optimizer did not converge (optimality residual {residual:.3e} after {iterations} iterations)")]
    OptimizerDidNotConverge { residual: f64, iterations: usize },
    #[error("generator is not cyclic on the state (deviation {0:.3e})")]
    NotCyclic(f64),
    #[error("states are identical up to phase")]
    IdenticalStates,
    #[error("states are not parity eigenstates: {0}")]
    NotParityEigenstates(String),
    #[error("states have the same parity")]
    SameParity,
    #[error("need at least 3 refinement levels, got {0}")]
    InsufficientLevels(usize),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("corrupt cache entry: {0}")]
    CacheCorrupt(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
