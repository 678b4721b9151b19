//! Experiment runners. Each takes a validated config and an output root,
//! writes its artifacts under `<out>/<experiment>/`, and returns whether
//! every check passed. Numerical failures surface as errors; check
//! failures do not (the caller maps them to the exit code after all
//! artifacts are on disk).

pub mod duality;
pub mod eigen;
pub mod exponents;
pub mod sweep;
pub mod testfn;

use std::path::Path;

use serde::Serialize;

use crate::config::{CliError, ExperimentConfig, ExperimentKind};

/// Outcome of one experiment inside an `all` run.
#[derive(Serialize)]
struct AllEntry {
    experiment: &'static str,
    passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Serialize)]
struct AllReport {
    experiments: Vec<AllEntry>,
}

/// Run every experiment the config supports, then write an aggregate
/// summary. Numerical failure in one experiment does not stop the others.
pub fn run_all(cfg: &ExperimentConfig, out_root: &Path) -> Result<bool, CliError> {
    let runners: [(&'static str, fn(&ExperimentConfig, &Path) -> Result<bool, CliError>); 5] = [
        ("exponents", exponents::run),
        ("eigen", eigen::run),
        ("testfn", testfn::run),
        ("sweep", sweep::run),
        ("duality", duality::run),
    ];
    let mut entries = Vec::new();
    let mut numerical: Option<String> = None;
    let mut all_passed = true;
    for (name, f) in runners {
        match f(cfg, out_root) {
            Ok(passed) => {
                all_passed &= passed;
                entries.push(AllEntry {
                    experiment: name,
                    passed,
                    error: None,
                });
            }
            Err(e) => {
                all_passed = false;
                if numerical.is_none() {
                    numerical = Some(format!("{name}: {e}"));
                }
                entries.push(AllEntry {
                    experiment: name,
                    passed: false,
                    error: Some(e.to_string()),
                });
            }
        }
    }
    let summary = crate::report::RunSummary {
        experiment: ExperimentKind::All.name(),
        profile: cfg.profile.build()?.label,
        passed: all_passed,
        checks: Vec::new(),
        report: AllReport { experiments: entries },
        config: cfg.clone(),
    };
    crate::report::write_summary(&crate::report::experiment_dir(out_root, "all"), &summary)?;
    if let Some(msg) = numerical {
        return Err(CliError::Numerical(msg));
    }
    Ok(all_passed)
}
