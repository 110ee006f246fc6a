use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("distributional density: a discrete bath has no pointwise spectral value")]
    DistributionalDensity,

    #[error("degenerate classical ground state: k_BT = 0 with hbar = 0")]
    DegenerateClassicalGroundState,

    #[error("massless bath mode at index {index}")]
    MasslessBathMode { index: usize },

    #[error("non-integrable noise spectrum: {0} (needs Drude cutoff)")]
    NonIntegrableSpectrum(&'static str),

    #[error("negative spectral value {value} at omega = {omega}")]
    NegativeSpectrum { omega: f64, value: f64 },

    #[error("slicing step too coarse: 1 + dt*c = {factor} at slice {index}")]
    SlicingTooCoarse { index: usize, factor: f64 },

    #[error("factorization singular: Riccati solution blows up at t = {time}")]
    FactorizationSingular { time: f64 },

    #[error("marginal root {re} + {im}i, regularization undefined")]
    MarginalRoot { re: f64, im: f64 },

    #[error("quadrature did not converge: estimate {estimate}, residual {residual}")]
    QuadratureNonConvergence { estimate: f64, residual: f64 },

    #[error("trajectory diverged at step {step}")]
    TrajectoryDiverged { step: usize },

    #[error("stability bound violated: dt = {dt} exceeds {max_dt}; suggested dt = {suggested}")]
    Unstable { dt: f64, max_dt: f64, suggested: f64 },

    #[error("mismatched domains: {0}")]
    DomainMismatch(String),

    #[error("classical limit has infinite decoherence rate (hbar = 0)")]
    ClassicalLimit,

    #[error("unstable step: hermiticity violation {violation:e}")]
    HermiticityViolation { violation: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}

pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be finite and > 0, got {value}")))
    }
}
