//! Error type shared by all numerical modules.

use thiserror::Error;

/// Errors produced while building profiles, solving ODEs, evaluating
/// integrals or measuring lifespans.
#[derive(Debug, Error)]
pub enum Error {
    /// A coefficient profile violates one of its declared structural
    /// hypotheses (sign conditions, local/asymptotic indices, ...).
    #[error("invalid coefficient profile: {0}")]
    InvalidProfile(String),

    /// An operation was called outside its domain of validity.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The index shift rho(v) is only defined for v >= -((n-2)/2)^2.
    #[error("rho undefined: v = {v} below the critical floor {floor} for n = {n}")]
    RhoDomain { v: f64, floor: f64, n: u32 },

    /// The adaptive ODE integrator could not reach the requested radius.
    #[error("ODE integration failed at r = {r}: {reason}")]
    SolveFailure { r: f64, reason: String },

    /// Adaptive quadrature did not converge to the requested tolerance.
    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),

    /// A finite-difference evolution produced non-finite values before any
    /// blow-up threshold was crossed; callers may retry with a smaller step.
    #[error("time stepping unstable at t = {t}; retry with a smaller step")]
    Unstable { t: f64 },

    /// Too few usable rows to fit a scaling law.
    #[error("fit refused: only {usable} usable rows (need at least {needed})")]
    FitRefused { usable: usize, needed: usize },

    /// An integral that the theory predicts to diverge for this parameter
    /// choice was requested.
    #[error("integral diverges: {0}")]
    Divergent(String),
}

pub type Result<T> = std::result::Result<T, Error>;
