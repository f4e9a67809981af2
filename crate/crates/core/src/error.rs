use thiserror::Error;

/// Unified error type for the core library.
///
/// Numerical routines return structured errors instead of panicking so the
/// CLI can map them onto exit codes and callers can recover (refine a grid,
/// fall back to Monte Carlo, ...).
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("chaos order {order} exceeds the supported cap {cap}")]
    OrderTooHigh { order: usize, cap: usize },

    #[error(
        "exact enumeration needs {required} kernel evaluations, budget is {budget}; \
         use the Monte Carlo route (multiple_integral draws) instead"
    )]
    EnumerationBudget { required: u128, budget: u128 },

    #[error("contraction order r={r} must lie in 0..=min(p={p}, q={q})")]
    ContractionOrder { r: usize, p: usize, q: usize },

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("covariance matrix is not positive definite even with jitter {max_jitter:e}")]
    NotPositiveDefinite { max_jitter: f64 },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("sample path is missing required times: {missing:?}")]
    MissingTimes { missing: Vec<f64> },

    #[error("empty selection: {0}")]
    EmptySelection(String),

    #[error("statistic must be positive, got {value}")]
    NonPositiveStatistic { value: f64 },

    #[error("spectral synthesis failed: {0}")]
    Spectrum(String),

    #[error("unsupported mode: {0}")]
    Mode(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
