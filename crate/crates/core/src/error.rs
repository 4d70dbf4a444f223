use serde::Serialize;
use thiserror::Error;

/// Errors raised by sampling, spectral computations and trajectory tracking.
/// Serializes as an object tagged by `kind`.
#[derive(Debug, Clone, PartialEq, Error, Serialize)]
#[serde(tag = "kind", content = "details", rename_all = "kebab-case")]
pub enum Error {
    #[error("invalid dimension {n}: {reason}")]
    InvalidDimension { n: usize, reason: &'static str },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("eigensolver did not converge for eigenvalue index {index} after {iterations} iterations")]
    EigenNonConvergence { index: usize, iterations: usize },

    #[error("point {re}{im:+}i lies within {distance:e} of the pole at index {index}")]
    PoleProximity {
        index: usize,
        distance: f64,
        re: f64,
        im: f64,
    },

    #[error("argument outside the domain: {0}")]
    Domain(String),

    #[error("grid point {index} lies outside the spectral domain: {reason}")]
    OutsideDomain { index: usize, reason: String },

    #[error("Newton iteration failed for root {index} at t = {t} after {iterations} iterations")]
    NewtonDivergence {
        index: usize,
        t: f64,
        iterations: usize,
    },

    #[error("step to t = {t} rejected for root {index}: {reason}")]
    StepRejected {
        index: usize,
        t: f64,
        reason: &'static str,
    },

    #[error("trajectories {j} and {k} collided at t = {t} (distance {distance:e})")]
    Collision {
        j: usize,
        k: usize,
        t: f64,
        distance: f64,
        /// Last accepted state, one value per trajectory.
        state: Vec<(f64, f64)>,
    },

    #[error("singular right-hand side at t = {t}: eigenvalues {j} and {k} are {gap:e} apart")]
    Singularity { j: usize, k: usize, t: f64, gap: f64 },

    #[error("polynomial root oracle did not converge after {sweeps} sweeps (max correction {max_correction:e})")]
    OracleNonConvergence { sweeps: usize, max_correction: f64 },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
