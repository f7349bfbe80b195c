use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid size: {0}")]
    InvalidSize(String),

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid compressor: {0}")]
    InvalidCompressor(String),

    #[error("invalid number of compression rounds: {0}")]
    InvalidRounds(usize),

    #[error("shrinkage {0} outside (0, 1)")]
    InvalidShrinkage(f64),

    #[error("invalid construction: {0}")]
    InvalidConstruction(String),

    #[error("comparator did not converge after {iterations} iterations (stationarity {residual:e})")]
    ComparatorFailure { iterations: usize, residual: f64 },

    #[error("invalid exploration radius {eps} (inner radius {inner_radius})")]
    InvalidExploration { eps: f64, inner_radius: f64 },

    #[error("consensus step size {0} outside (0, 1]")]
    InvalidStepSize(f64),

    #[error("horizon {horizon} shorter than block length {block}")]
    HorizonTooShort { horizon: usize, block: usize },

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("internal invariant violated: {0}")]
    InternalInvariant(String),

    #[error("invalid pairing: {0}")]
    InvalidPairing(String),

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
