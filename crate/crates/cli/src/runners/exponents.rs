//! Exponent experiment: threshold set of the profile, root identities of
//! the Strauss/Glassey scale, and the lifespan-rate classification at the
//! configured power.

use std::path::Path;

use serde::Serialize;

use blowup_core::exponents::{gamma, glassey, strauss, thresholds, ExponentSet};
use blowup_core::lifespan::{classify, LifespanBound, Theorem};

use crate::config::{CliError, ExperimentConfig};
use crate::report::{experiment_dir, fmt_f, write_csv, write_summary, Check, RunSummary};

#[derive(Serialize)]
struct TheoremRow {
    theorem: &'static str,
    applicable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    bound: Option<LifespanBound>,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

#[derive(Serialize)]
struct Report {
    thresholds: ExponentSet,
    root_grid_size: usize,
    max_strauss_root_residual: f64,
    max_glassey_gamma_deviation: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    classification: Vec<TheoremRow>,
}

const THEOREMS: [(Theorem, &str); 4] = [
    (Theorem::Scattering, "scattering"),
    (Theorem::ShortRange, "short_range"),
    (Theorem::General, "general"),
    (Theorem::VanishingDamping, "vanishing_damping"),
];

pub fn run(cfg: &ExperimentConfig, out_root: &Path) -> Result<bool, CliError> {
    let dir = experiment_dir(out_root, "exponents");
    let profile = cfg.profile.build()?;
    let e = thresholds(&profile)?;

    // thresholds.csv: one named quantity per row
    let named: [(&str, f64); 13] = [
        ("rho_v0", e.rho_v0),
        ("rho_v0_d0", e.rho_v0_d0),
        ("rho_v_inf", e.rho_v_inf),
        ("p1", e.p1),
        ("p2", e.p2),
        ("p0", e.p0),
        ("p3", e.p3),
        ("p4", e.p4),
        ("p5", e.p5),
        ("ps_shift", e.ps_shift),
        ("pg_shift", e.pg_shift),
        ("p_c", e.p_c),
        ("n", profile.n as f64),
    ];
    write_csv(
        &dir.join("thresholds.csv"),
        "name,value",
        named.iter().map(|(k, v)| format!("{k},{}", fmt_f(*v))),
    )?;

    // root identities of the critical curve on 100 dimensions m in (1, 50]
    let mut max_s = 0.0f64;
    let mut max_g = 0.0f64;
    let mut rows = Vec::new();
    for i in 1..=100 {
        let m = 1.0 + 49.0 * i as f64 / 100.0;
        let ps = strauss(m);
        let pg = glassey(m);
        let gs = gamma(ps, m).abs();
        let gg = (gamma(pg, m) - 2.0).abs();
        max_s = max_s.max(gs);
        max_g = max_g.max(gg);
        rows.push(format!(
            "{},{},{},{},{}",
            fmt_f(m),
            fmt_f(ps),
            fmt_f(gs),
            fmt_f(pg),
            fmt_f(gg)
        ));
    }
    write_csv(
        &dir.join("gamma_roots.csv"),
        "m,p_strauss,abs_gamma_at_p_strauss,p_glassey,abs_gamma_at_p_glassey_minus_2",
        rows,
    )?;

    // classification of the lifespan rate at the configured power
    let mut classification = Vec::new();
    if let Some(p) = cfg.p {
        let mut class_rows = Vec::new();
        for (th, name) in THEOREMS {
            match classify(th, &profile, p) {
                Ok(b) => {
                    class_rows.push(format!(
                        "{name},{:?},{},{},{}",
                        b.form,
                        fmt_f(b.a),
                        fmt_f(b.b),
                        b.case_id
                    ));
                    classification.push(TheoremRow {
                        theorem: name,
                        applicable: true,
                        bound: Some(b),
                        note: None,
                    });
                }
                Err(err) => classification.push(TheoremRow {
                    theorem: name,
                    applicable: false,
                    bound: None,
                    note: Some(err.to_string()),
                }),
            }
        }
        write_csv(
            &dir.join("classification.csv"),
            "theorem,form,a,b,case_id",
            class_rows,
        )?;
    }

    let mut checks = vec![
        Check::le("strauss_root_residual", max_s, 1e-9),
        Check::le("glassey_gamma_deviation", max_g, 1e-12),
        Check::holds("p1_le_p0", e.p1 <= e.p0),
        Check::holds("p2_le_p0", e.p2 <= e.p0),
        Check::holds("p_c_is_max_of_shifts", e.p_c == e.ps_shift.max(e.pg_shift)),
    ];
    // the combined-branch knee always sits below the critical power
    if e.p3.is_finite() {
        checks.push(Check::holds("min_p3_p5_below_p_c", e.p3.min(e.p5) < e.p_c));
    }
    let passed = checks.iter().all(|c| c.passed);

    let summary = RunSummary {
        experiment: "exponents",
        profile: profile.label.clone(),
        passed,
        checks,
        report: Report {
            thresholds: e,
            root_grid_size: 100,
            max_strauss_root_residual: max_s,
            max_glassey_gamma_deviation: max_g,
            p: cfg.p,
            classification,
        },
        config: cfg.clone(),
    };
    write_summary(&dir, &summary)
}
