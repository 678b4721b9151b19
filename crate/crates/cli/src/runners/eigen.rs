//! Eigenfunction experiment: construct the λ = 0 and λ = 1 radial modes,
//! fit their tails against the declared profile indices, and measure the
//! spread of the family envelope over the configured spectral parameters.

use std::fs;
use std::path::Path;

use serde::Serialize;

use blowup_core::eigen::{
    fit_asymptotics, serialize_radial, solve_phi_with, uniform_bound_check, AsymptoticFit,
    SolveOptions, TailModel, UniformBoundReport,
};
use blowup_core::exponents::rho;

use crate::config::{CliError, ExperimentConfig};
use crate::report::{experiment_dir, fmt_f, write_csv, write_summary, Check, RunSummary};

const DEFAULT_LAMBDAS: [f64; 5] = [1.0, 0.3, 0.1, 0.03, 0.01];

/// Grid reach needed for a stable pure-power tail fit (λ = 0).
const R_MAX_POWER: f64 = 1.0e5;
/// Grid reach needed to separate the r-power from the e^(λr) factor (λ = 1).
const R_MAX_EXP: f64 = 4.0e5;

#[derive(Serialize)]
struct TailRow {
    lambda: f64,
    fit: AsymptoticFit,
    theory_exponent: f64,
    abs_error: f64,
    ode_residual: f64,
}

#[derive(Serialize)]
struct Report {
    phi0: TailRow,
    phi_lambda1: TailRow,
    lambdas: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    envelope: Option<UniformBoundReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    envelope_note: Option<String>,
}

pub fn run(cfg: &ExperimentConfig, out_root: &Path) -> Result<bool, CliError> {
    let dir = experiment_dir(out_root, "eigen");
    fs::create_dir_all(&dir)?;
    let profile = cfg.profile.build()?;
    let n = profile.n as f64;
    let opts = SolveOptions {
        rtol: cfg.grid.rtol,
        ..SolveOptions::default()
    };

    let phi0 = solve_phi_with(&profile, 0.0, R_MAX_POWER, &opts)?;
    let phi1 = solve_phi_with(&profile, 1.0, R_MAX_EXP, &opts)?;
    for (name, f) in [("phi0", &phi0), ("phi_lambda1", &phi1)] {
        let mut out = fs::File::create(dir.join(format!("{name}.csv")))?;
        serialize_radial(f, &mut out)?;
    }

    let fit0 = fit_asymptotics(&phi0, TailModel::Power)?;
    let fit1 = fit_asymptotics(&phi1, TailModel::ExpPower)?;
    let theory0 = rho(profile.v_inf, profile.n)?;
    let theory1 = -(n - 1.0 - profile.d_inf) / 2.0;
    let err0 = (fit0.exponent_estimate - theory0).abs();
    let err1 = (fit1.exponent_estimate - theory1).abs();
    let row0 = TailRow {
        lambda: 0.0,
        fit: fit0,
        theory_exponent: theory0,
        abs_error: err0,
        ode_residual: phi0.ode_residual(&profile),
    };
    let row1 = TailRow {
        lambda: 1.0,
        fit: fit1,
        theory_exponent: theory1,
        abs_error: err1,
        ode_residual: phi1.ode_residual(&profile),
    };
    write_csv(
        &dir.join("tails.csv"),
        "lambda,exponent,exp_rate,residual,window_lo,window_hi,theory_exponent,abs_error",
        [&row0, &row1].iter().map(|t| {
            format!(
                "{},{},{},{},{},{},{},{}",
                fmt_f(t.lambda),
                fmt_f(t.fit.exponent_estimate),
                fmt_f(t.fit.exp_rate_estimate),
                fmt_f(t.fit.residual),
                fmt_f(t.fit.fit_window.0),
                fmt_f(t.fit.fit_window.1),
                fmt_f(t.theory_exponent),
                fmt_f(t.abs_error)
            )
        }),
    )?;

    let lambdas = cfg
        .lambdas
        .clone()
        .unwrap_or_else(|| DEFAULT_LAMBDAS.to_vec());
    let (envelope, envelope_note) = if profile.is_scattering() {
        (Some(uniform_bound_check(&profile, &lambdas)?), None)
    } else {
        (
            None,
            Some("envelope bound applies to scattering profiles only".to_string()),
        )
    };
    if let Some(env) = &envelope {
        write_csv(
            &dir.join("envelope.csv"),
            "lambda,min_ratio,max_ratio",
            env.per_lambda
                .iter()
                .map(|(l, lo, hi)| format!("{},{},{}", fmt_f(*l), fmt_f(*lo), fmt_f(*hi))),
        )?;
    }

    let mut checks = vec![
        Check::le("phi0_tail_exponent_error", err0, 0.02 * theory0.abs().max(1.0)),
        Check::le(
            "phi_lambda1_tail_power_error",
            err1,
            0.05 * theory1.abs().max(1.0),
        ),
    ];
    if let Some(env) = &envelope {
        checks.push(Check::le("envelope_spread", env.spread, 10.0));
    }
    let passed = checks.iter().all(|c| c.passed);

    if cfg.svg {
        let chart = crate::report::Chart {
            title: format!("radial modes, {}", profile.label),
            x_label: "ln r".into(),
            y_label: "ln phi".into(),
            series: vec![
                crate::report::Series {
                    label: "lambda = 0".into(),
                    points: sampled_log(&phi0),
                },
                crate::report::Series {
                    label: "lambda = 1".into(),
                    points: sampled_log(&phi1),
                },
            ],
        };
        chart.render(&dir.join("modes.svg"))?;
    }

    let summary = RunSummary {
        experiment: "eigen",
        profile: profile.label.clone(),
        passed,
        checks,
        report: Report {
            phi0: row0,
            phi_lambda1: row1,
            lambdas,
            envelope,
            envelope_note,
        },
        config: cfg.clone(),
    };
    write_summary(&dir, &summary)
}

/// Thin the geometric grid to at most 200 chart points of (ln r, log phi).
fn sampled_log(f: &blowup_core::eigen::RadialFunction) -> Vec<(f64, f64)> {
    let stride = (f.grid.len() / 200).max(1);
    f.grid
        .iter()
        .zip(&f.logvals)
        .step_by(stride)
        .map(|(&r, &l)| (r.ln(), l))
        .collect()
}
