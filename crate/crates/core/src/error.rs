use thiserror::Error;

/// Errors produced by the simulation and derivative pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit count mismatch: {left} vs {right}")]
    QubitMismatch { left: usize, right: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),

    #[error("shot count must be positive")]
    ZeroShots,

    #[error("invalid Pauli string {0:?}")]
    InvalidPauli(String),

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("invalid insertion: {0}")]
    InvalidInsertion(String),

    #[error("invalid Hamiltonian: {0}")]
    InvalidHamiltonian(String),

    #[error("x = {x} lies outside the tabulated range [{lo}, {hi}]")]
    OutOfRange { x: f64, lo: f64, hi: f64 },

    #[error("unsupported derivative order {order}: {reason}")]
    UnsupportedOrder { order: usize, reason: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("stationarity guard failed: max |dE/dtheta| = {grad_norm:e} exceeds {tol:e}")]
    NotStationary { grad_norm: f64, tol: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("linear solve failed: {0}")]
    Solve(String),

    #[error("levels {r} and {s} are not orthogonal: overlap {overlap:e} exceeds {tol:e}")]
    Orthogonality { r: usize, s: usize, overlap: f64, tol: f64 },

    #[error("level {level} energy {energy} is below level {prev_level} energy {prev_energy}")]
    NonAscending { level: usize, energy: f64, prev_level: usize, prev_energy: f64 },

    #[error("re-optimization at x = {x:?} jumped branch (parameter shift {shift})")]
    BranchJump { x: Vec<f64>, shift: f64 },

    #[error("low-depth sign calibration failed: {0}")]
    SignCalibration(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(format!("{e} (line {}, column {})", e.line(), e.column()))
    }
}
