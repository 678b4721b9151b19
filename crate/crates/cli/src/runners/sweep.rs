//! Lifespan sweep: measure the blow-up time across the configured data
//! sizes, fit the scaling law, and compare against the sharpest classified
//! rate when one applies.

use std::path::Path;

use serde::Serialize;

use blowup_core::lifespan::{classify, BoundForm, LifespanBound, Theorem};
use blowup_core::sim::{
    compare_with_bound, epsilon_sweep, fit_sweep, BoundComparison, CauchyProblem,
    LifespanMeasurement, SweepFit,
};

use crate::config::{CliError, ExperimentConfig};
use crate::report::{experiment_dir, fmt_f, write_csv, write_summary, Check, RunSummary, Series};

#[derive(Serialize)]
struct BoundBlock {
    theorem: &'static str,
    bound: LifespanBound,
    comparison: BoundComparison,
}

#[derive(Serialize)]
struct Report {
    rows: Vec<LifespanMeasurement>,
    fit: SweepFit,
    #[serde(skip_serializing_if = "Option::is_none")]
    bound: Option<BoundBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bound_note: Option<String>,
}

/// Sharpest power-form rate any theorem claims for this (profile, p):
/// smallest (a, b) lexicographically.
fn best_bound(
    profile: &blowup_core::profile::CoefficientProfile,
    p: f64,
) -> Option<(&'static str, LifespanBound)> {
    let mut best: Option<(&'static str, LifespanBound)> = None;
    for (th, name) in [
        (Theorem::Scattering, "scattering"),
        (Theorem::ShortRange, "short_range"),
        (Theorem::General, "general"),
        (Theorem::VanishingDamping, "vanishing_damping"),
    ] {
        if let Ok(b) = classify(th, profile, p) {
            if matches!(b.form, BoundForm::Power | BoundForm::PowerLog) {
                let better = match &best {
                    None => true,
                    Some((_, cur)) => (b.a, b.b) < (cur.a, cur.b),
                };
                if better {
                    best = Some((name, b));
                }
            }
        }
    }
    best
}

pub fn run(cfg: &ExperimentConfig, out_root: &Path) -> Result<bool, CliError> {
    let dir = experiment_dir(out_root, "sweep");
    let profile = cfg.profile.build()?;
    let p = cfg
        .p
        .ok_or_else(|| CliError::Config("sweep requires p".into()))?;
    let epsilons = cfg
        .epsilons
        .clone()
        .ok_or_else(|| CliError::Config("sweep requires epsilons".into()))?;

    let problem = CauchyProblem::bump(&profile, epsilons[0], p, 1.0);
    let rows = epsilon_sweep(&problem, &epsilons, cfg.grid.dr, cfg.grid.t_max)?;
    write_csv(
        &dir.join("sweep.csv"),
        "epsilon,t_est,t_lower,t_upper,converged,censored,dr,dt",
        rows.iter().map(|m| {
            format!(
                "{},{},{},{},{},{},{},{}",
                fmt_f(m.epsilon),
                fmt_f(m.t_est),
                fmt_f(m.t_lower),
                fmt_f(m.t_upper),
                m.converged,
                m.censored,
                fmt_f(m.dr),
                fmt_f(m.dt)
            )
        }),
    )?;

    let fit = fit_sweep(&rows)?;

    // blow-up time shrinks as the data grows; allow 5% measurement wiggle
    let mut worst_ratio = 0.0f64;
    let mut sorted: Vec<&LifespanMeasurement> = rows
        .iter()
        .filter(|m| m.converged && !m.censored)
        .collect();
    sorted.sort_by(|a, b| a.epsilon.partial_cmp(&b.epsilon).unwrap());
    for w in sorted.windows(2) {
        worst_ratio = worst_ratio.max(w[1].t_est / w[0].t_est);
    }

    let (bound, bound_note) = match best_bound(&profile, p) {
        Some((name, b)) => {
            let comparison = compare_with_bound(&rows, &b)?;
            write_csv(
                &dir.join("bound.csv"),
                "theorem,form,a,b,case_id,c_max,spread,rows_used",
                [format!(
                    "{name},{:?},{},{},{},{},{},{}",
                    b.form,
                    fmt_f(b.a),
                    fmt_f(b.b),
                    b.case_id,
                    fmt_f(comparison.c_max),
                    fmt_f(comparison.spread),
                    comparison.rows_used
                )],
            )?;
            (
                Some(BoundBlock {
                    theorem: name,
                    bound: b,
                    comparison,
                }),
                None,
            )
        }
        None => (
            None,
            Some("no theorem claims a power-form rate here".to_string()),
        ),
    };

    let mut checks = vec![
        Check::ge("fit_rows_used", fit.rows_used as f64, 4.0),
        Check::le("lifespan_monotone_worst_ratio", worst_ratio, 1.05),
    ];
    if let Some(bb) = &bound {
        checks.push(Check::le("bound_constant_spread", bb.comparison.spread, 10.0));
    }
    let passed = checks.iter().all(|c| c.passed);

    if cfg.svg {
        let measured: Vec<(f64, f64)> = sorted
            .iter()
            .map(|m| ((1.0 / m.epsilon).ln(), m.t_est.ln()))
            .collect();
        let fit_line: Vec<(f64, f64)> = measured
            .iter()
            .map(|&(x, _)| (x, fit.c_fit.ln() + fit.a_hat * x))
            .collect();
        crate::report::Chart {
            title: format!("lifespan scaling, {}", profile.label),
            x_label: "ln(1/epsilon)".into(),
            y_label: "ln T".into(),
            series: vec![
                Series {
                    label: "measured".into(),
                    points: measured,
                },
                Series {
                    label: format!("fit, slope {:.3}", fit.a_hat),
                    points: fit_line,
                },
            ],
        }
        .render(&dir.join("sweep.svg"))?;
    }

    let summary = RunSummary {
        experiment: "sweep",
        profile: profile.label.clone(),
        passed,
        checks,
        report: Report {
            rows,
            fit,
            bound,
            bound_note,
        },
        config: cfg.clone(),
    };
    write_summary(&dir, &summary)
}
