use thiserror::Error;

/// Errors raised by the simulation and design layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid device: {0}")]
    InvalidDevice(String),

    #[error("infeasible resonance: {0}")]
    InfeasibleResonance(String),

    #[error("design infeasible: {0}")]
    DesignInfeasible(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("no sign change in bracket [{lo}, {hi}]: f(lo)={f_lo:e}, f(hi)={f_hi:e}")]
    Bracketing { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("numerical blow-up (NaN) at t = {t} ns")]
    NumericalBlowup { t: f64 },

    #[error("step size too large: {what} drifted by {drift:e} at t = {t} ns; reduce dt")]
    StepSize { what: &'static str, drift: f64, t: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("density-matrix invariant violated at t = {t} ns: {what}")]
    StateInvariant { what: String, t: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
