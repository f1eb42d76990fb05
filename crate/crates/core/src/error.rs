use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is not centrosymmetric (max mirror deviation {deviation:e})")]
    NotCentrosymmetric { deviation: f64 },

    #[error("power iteration did not converge after {iterations} iterations (last estimate {last_estimate})")]
    NormNotConverged { iterations: usize, last_estimate: f64 },

    #[error(transparent)]
    Eigen(#[from] EigenError),

    #[error("trial {trial}: {source}")]
    Trial {
        trial: u64,
        #[source]
        source: EigenError,
    },

    #[error("all {trials} trials were rejected by the spectral-radius guard (rho = {rho})")]
    AllTrialsRejected { trials: usize, rho: f64 },

    #[error("z = {z} lies within {distance:e} of an eigenvalue")]
    NearEigenvalue { z: Complex64, distance: f64 },

    #[error("enumeration of {tuples} index tuples exceeds the budget of {budget}")]
    BudgetExceeded { tuples: u128, budget: u128 },

    #[error("exact moments are only available for the circular Gaussian law, got {0}")]
    UnsupportedDistribution(String),

    #[error("empty spectrum")]
    EmptySpectrum,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// QR iteration ran out of sweeps. Carries what had deflated so far.
#[derive(Debug, Clone, Error)]
#[error("QR iteration did not converge after {iterations} iterations; {} eigenvalues deflated, active window rows {}..={}", .found.len(), .active.0, .active.1)]
pub struct EigenError {
    pub iterations: usize,
    pub found: Vec<Complex64>,
    pub active: (usize, usize),
}
