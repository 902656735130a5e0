use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("overflow evaluating {what} (kappa*L*q = {exponent:.3e})")]
    Overflow { what: &'static str, exponent: f64 },

    #[error("grid shape mismatch: expected {expected:?}, got {got:?}")]
    GridMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("time step too large: dt*max_outflow = {0:.4} exceeds 2.5")]
    StabilityGuard(f64),

    #[error("no convergence by t = {t:.3} (residual {residual:.3e}, tol {tol:.3e})")]
    NotConverged { t: f64, residual: f64, tol: f64 },

    #[error("probability leaked off the grid: {0:.3e} > 1e-6")]
    TailLeak(f64),

    #[error("negative probability {value:.3e} at ({n1}, {n2})")]
    NegativeProbability { n1: usize, n2: usize, value: f64 },

    #[error("generator has no unique steady state: {0}")]
    Singular(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
