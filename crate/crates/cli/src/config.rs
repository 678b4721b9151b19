//! Experiment configuration: strict JSON schema, validation, and the
//! mapping onto core profiles.
//!
//! The schema is deliberately rigid (unknown keys are errors) so that a
//! config file pins down a run completely and reruns stay reproducible.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use blowup_core::exponents::thresholds;
use blowup_core::profile::CoefficientProfile;

/// Failure classes of the driver, in increasing order of "the math ran".
#[derive(Debug)]
pub enum CliError {
    /// The invocation or the config file is unusable. Exit code 1.
    Config(String),
    /// A computation failed to converge or could not be completed. Exit code 2.
    Numerical(String),
    /// Everything ran, but a verified invariant does not hold. Exit code 3.
    Check(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Check(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Check(m) => write!(f, "check failure: {m}"),
        }
    }
}

impl From<blowup_core::Error> for CliError {
    fn from(e: blowup_core::Error) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Numerical(format!("i/o: {e}"))
    }
}

/// Which experiment a config drives. `all` runs every experiment that the
/// config carries enough fields for, in a fixed order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Exponents,
    Eigen,
    Testfn,
    Sweep,
    Duality,
    All,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Exponents => "exponents",
            ExperimentKind::Eigen => "eigen",
            ExperimentKind::Testfn => "testfn",
            ExperimentKind::Sweep => "sweep",
            ExperimentKind::Duality => "duality",
            ExperimentKind::All => "all",
        }
    }
}

/// Coefficient profile selector: a named built-in family with its
/// parameters, or an explicit piecewise-linear table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileSpec {
    /// D = V = 0.
    Free { n: u32 },
    /// D = mu (1+r)^-beta with beta > 1, V = 0.
    Scattering { n: u32, mu: f64, beta: f64 },
    /// n = 3, D = 2/r beyond r0 (mollified inside), V = -D'/2 + D²/4.
    Gkw {
        #[serde(default = "default_r0")]
        r0: f64,
    },
    /// D = d/r, V = v/r².
    ScaleInvariant { n: u32, d: f64, v: f64 },
    /// Inverse-square singularities at the origin with declared tail indices.
    SingularDemo {
        n: u32,
        d0: f64,
        v0: f64,
        d_inf: f64,
        v_inf: f64,
    },
    /// Piecewise-linear samples (r, D, V) with declared indices outside the
    /// table range.
    Table {
        n: u32,
        points: Vec<(f64, f64, f64)>,
        v0: f64,
        d0: f64,
        v_inf: f64,
        d_inf: f64,
        theta: f64,
    },
}

fn default_r0() -> f64 {
    1.0
}

impl ProfileSpec {
    pub fn build(&self) -> Result<CoefficientProfile, CliError> {
        let prof = match self {
            ProfileSpec::Free { n } => CoefficientProfile::free(*n),
            ProfileSpec::Scattering { n, mu, beta } => {
                CoefficientProfile::scattering(*n, *mu, *beta)
            }
            ProfileSpec::Gkw { r0 } => CoefficientProfile::gkw(*r0),
            ProfileSpec::ScaleInvariant { n, d, v } => {
                CoefficientProfile::scale_invariant(*n, *d, *v)
            }
            ProfileSpec::SingularDemo {
                n,
                d0,
                v0,
                d_inf,
                v_inf,
            } => CoefficientProfile::singular_demo(*n, *d0, *v0, *d_inf, *v_inf),
            ProfileSpec::Table {
                n,
                points,
                v0,
                d0,
                v_inf,
                d_inf,
                theta,
            } => CoefficientProfile::table(*n, points.clone(), *v0, *d0, *v_inf, *d_inf, *theta)
                .map_err(|e| CliError::Config(e.to_string()))?,
        };
        prof.validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        Ok(prof)
    }
}

/// Discretization and tolerance block shared by the simulation-backed
/// experiments.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    /// Radial step of the evolution grid.
    #[serde(default = "default_dr")]
    pub dr: f64,
    /// Courant number dt/dr.
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    /// Evolution horizon.
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    /// Optional wall radius override (default: past the light cone).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
    /// Relative tolerance of the radial eigenfunction integrator.
    #[serde(default = "default_rtol")]
    pub rtol: f64,
}

fn default_dr() -> f64 {
    0.1
}
fn default_cfl() -> f64 {
    0.45
}
fn default_t_max() -> f64 {
    150.0
}
fn default_rtol() -> f64 {
    1e-10
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection {
            dr: default_dr(),
            cfl: default_cfl(),
            t_max: default_t_max(),
            r_max: None,
            rtol: default_rtol(),
        }
    }
}

/// A complete experiment description. Serializing a parsed config and
/// re-parsing it yields an identical value (round-trip invariant).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub profile: ProfileSpec,
    /// Nonlinearity power; required by testfn, sweep and duality.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    /// Data sizes for the lifespan sweep (at least 5, spanning a decade).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilons: Option<Vec<f64>>,
    /// Spectral parameters for the eigen experiment, each in (0, 1].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<f64>>,
    #[serde(default)]
    pub grid: GridSection,
    /// Override grid for the duality experiment (it wants a short horizon
    /// at high resolution, unlike a sweep). Falls back to `grid`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duality_grid: Option<GridSection>,
    /// Output directory; overridden by --out and by BLOWUP_LAB_OUT.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Also render SVG line charts next to the CSV artifacts.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub svg: bool,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Full up-front validation so that nothing structurally wrong survives
    /// to the runners: every later failure is then genuinely numerical.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        let prof = self.profile.build()?;
        // threshold computation must succeed for every experiment
        thresholds(&prof).map_err(|e| CliError::Config(e.to_string()))?;

        for g in std::iter::once(&self.grid).chain(self.duality_grid.as_ref()) {
            if !(g.dr > 0.0 && g.dr < 10.0) {
                return bad(format!("grid.dr must lie in (0, 10), got {}", g.dr));
            }
            if !(g.cfl > 0.0 && g.cfl < 1.0) {
                return bad(format!("grid.cfl must lie in (0, 1), got {}", g.cfl));
            }
            if !(g.t_max > 0.0) {
                return bad(format!("grid.t_max must be positive, got {}", g.t_max));
            }
            if let Some(rm) = g.r_max {
                if !(rm > 4.0 * g.dr) {
                    return bad(format!("grid.r_max = {rm} leaves no interior nodes"));
                }
            }
            if !(g.rtol > 0.0 && g.rtol <= 1e-4) {
                return bad(format!("grid.rtol must lie in (0, 1e-4], got {}", g.rtol));
            }
        }
        if let Some(p) = self.p {
            if !(p > 1.0) {
                return bad(format!("p must exceed 1, got {p}"));
            }
        }
        if let Some(ls) = &self.lambdas {
            if ls.is_empty() || ls.iter().any(|&l| !(l > 0.0 && l <= 1.0)) {
                return bad("lambdas must be a nonempty list within (0, 1]".into());
            }
        }

        let needs_p = matches!(
            self.experiment,
            ExperimentKind::Testfn
                | ExperimentKind::Sweep
                | ExperimentKind::Duality
                | ExperimentKind::All
        );
        if needs_p && self.p.is_none() {
            return bad(format!(
                "experiment '{}' requires the field p",
                self.experiment.name()
            ));
        }
        let needs_eps = matches!(self.experiment, ExperimentKind::Sweep | ExperimentKind::All);
        if needs_eps {
            // mirror the sweep preconditions here so a hopeless sweep is a
            // config error (exit 1), not a late numerical one (exit 2)
            let eps = match &self.epsilons {
                None => {
                    return bad(format!(
                        "experiment '{}' requires the field epsilons",
                        self.experiment.name()
                    ))
                }
                Some(e) => e,
            };
            if eps.len() < 5 {
                return bad(format!("a sweep needs at least 5 epsilons, got {}", eps.len()));
            }
            if eps.iter().any(|&e| !(e > 0.0)) {
                return bad("epsilons must all be positive".into());
            }
            let lo = eps.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = eps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if hi / lo < 10.0 * (1.0 - 1e-12) {
                return bad(format!(
                    "a sweep must span at least a decade of epsilon (got ratio {:.3})",
                    hi / lo
                ));
            }
        }
        Ok(())
    }
}
