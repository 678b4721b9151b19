//! Numerical laboratory for finite-time blow-up of semilinear wave equations
//! with space-dependent damping and potential,
//!
//! ```text
//!     u_tt − Δu + D(|x|) u_t + V(|x|) u = |u|^p,     x ∈ ℝⁿ, n ≥ 2,
//! ```
//!
//! with small data of size ε. The crate has five layers:
//!
//! * [`exponents`]: closed-form critical exponents and lifespan-rate
//!   thresholds computed from the coefficient indices;
//! * [`lifespan`]: the case analysis mapping a profile and a power p to a
//!   predicted upper bound for the lifespan T(ε);
//! * [`profile`]: coefficient families D, V with declared local/asymptotic
//!   indices and structural validation;
//! * [`eigen`]: radial eigenfunctions φ_λ of Δφ = (λ² + λD + V)φ, the
//!   building blocks of the test functions;
//! * [`testfn`] / [`sim`]: the time-dependent test functions with their
//!   integral functionals, and a radial finite-difference solver measuring
//!   blow-up times directly.
//!
//! Shared numerics (adaptive Runge–Kutta, adaptive quadrature, least-squares
//! fits) live in [`ode`], [`quad`], and [`fit`].

pub mod eigen;
pub mod error;
pub mod exponents;
pub mod fit;
pub mod lifespan;
pub mod ode;
pub mod profile;
pub mod quad;
pub mod sim;
pub mod testfn;

pub use eigen::{
    fit_asymptotics, frobenius_seed, solve_phi, solve_phi_with, uniform_bound_check,
    AsymptoticFit, RadialFunction, SolveOptions, TailModel, UniformBoundReport,
};
pub use error::{Error, Result};
pub use exponents::{gamma, gamma0, gamma1, gamma2, glassey, rho, strauss, thresholds, ExponentSet};
pub use lifespan::{classify, BoundForm, LifespanBound, Theorem};
pub use profile::{builtin_families, CoefficientProfile, FamilyInfo, LocalSeries, RadialFn};
pub use sim::{
    compare_with_bound, epsilon_sweep, evolve, fit_sweep, measure_lifespan, BoundComparison,
    CauchyProblem, GridSpec, LifespanMeasurement, Outcome, RecordSpec, SimReport, SweepFit,
    Trajectory,
};
pub use testfn::{
    bq_identity_check, bq_lower_check, bq_upper_check, data_functionals, duality_residual,
    eta, eta_pow_derivs, f0_estimate, f1_estimate, f1_theory_slope, key_inequality_check,
    sphere_area, BqBoundReport, DataFunctionals, KeyInequalityReport, PhiFamily, SlopeReport,
    TestFunctionField,
};
