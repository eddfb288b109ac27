use thiserror::Error;

/// Errors raised by the model, solver and dynamics layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("circuit is not bistable: beta = {beta:.6} ({reason})")]
    NotBistable { beta: f64, reason: &'static str },

    #[error("quartic potential does not describe a physical SQUID: mu = {mu} eV >= {limit} eV")]
    NotPhysical { mu: f64, limit: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("eigensolver did not converge for level {level} (residual {residual:e})")]
    ConvergenceFailure { level: usize, residual: f64 },

    #[error("grid too coarse: ground-doublet splitting drifted by {drift:.3e} (relative) between the two finest grids")]
    GridTooCoarse { drift: f64 },

    #[error("index ({m}, {n}) out of range for a basis of {levels} levels")]
    IndexOutOfRange { m: usize, n: usize, levels: usize },

    #[error("wavepacket support leaves the grid: |x_m| + 5 sigma = {reach} > {limit}")]
    SupportOverflow { reach: f64, limit: f64 },

    #[error("wavefunction has {got} samples but the basis grid has {expected}")]
    GridMismatch { expected: usize, got: usize },

    #[error("projection captured only {captured:.4} of the norm (minimum {required:.4})")]
    InsufficientCapture { captured: f64, required: f64 },

    #[error("levels {n} and {m} are degenerate (|E_n - E_m| = {gap:e} eV)")]
    DegeneratePair { n: usize, m: usize, gap: f64 },

    #[error("time step too large: jump probability per step {probability:.3} exceeds 0.1")]
    StepTooLarge { probability: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
