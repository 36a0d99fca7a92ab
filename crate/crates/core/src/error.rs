use thiserror::Error;

/// Errors raised by the numerical operations in this crate.
///
/// Diagnostics (integrability reports, bound checks, residual checks) never
/// return an error for a failed property; they report it in their result.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("negative potential value {value} at r = {r}")]
    NegativePotential { r: f64, value: f64 },

    #[error("no truncation radius below the cap {cap} reaches tail {eps:e}")]
    TruncationNotFound { cap: f64, eps: f64 },

    #[error("ODE solver error estimate {estimate:e} exceeds tolerance {tol:e} (k = {k})")]
    SolverDivergence { k: f64, estimate: f64, tol: f64 },

    #[error("phase fit unstable: k * R_max = {kr} is below 2*pi")]
    FitUnstable { kr: f64 },

    #[error("zero-energy solution vanishes at r = {0}")]
    ZeroEnergyNode(f64),

    #[error("kernel iteration did not converge after {iterations} sweeps (last update {last_update:e})")]
    KernelNotConverged { iterations: usize, last_update: f64 },

    #[error("tail of {what} does not converge")]
    DivergentTail { what: String },

    #[error("sampler is not Hermitian: |M - M^H| = {0:e}")]
    NonHermitian(f64),

    #[error("solution corrupted: {0}")]
    Corrupted(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
