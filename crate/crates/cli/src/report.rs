//! Artifact emission: pass/fail records, CSV files with full-precision
//! floats, JSON summaries with a stable field order, and a small internal
//! SVG line-chart renderer (no plotting dependency).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::CliError;

/// One verified quantity: `value cmp limit` decided `passed`.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub limit: f64,
    pub cmp: &'static str,
}

impl Check {
    pub fn le(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Check {
            name: name.into(),
            passed: value <= limit,
            value,
            limit,
            cmp: "<=",
        }
    }

    pub fn ge(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Check {
            name: name.into(),
            passed: value >= limit,
            value,
            limit,
            cmp: ">=",
        }
    }

    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Check {
            name: name.into(),
            passed: ok,
            value: if ok { 1.0 } else { 0.0 },
            limit: 1.0,
            cmp: "==",
        }
    }
}

/// Envelope common to every experiment summary. Field order is fixed by
/// the struct; two runs of one config serialize byte-identically.
#[derive(Serialize)]
pub struct RunSummary<T: Serialize> {
    pub experiment: &'static str,
    pub profile: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub report: T,
    pub config: crate::config::ExperimentConfig,
}

/// Write `summary.json` and return overall pass/fail.
pub fn write_summary<T: Serialize>(dir: &Path, summary: &RunSummary<T>) -> Result<bool, CliError> {
    fs::create_dir_all(dir)?;
    let mut text = serde_json::to_string_pretty(summary)
        .map_err(|e| CliError::Numerical(format!("summary serialization: {e}")))?;
    text.push('\n');
    fs::write(dir.join("summary.json"), text)?;
    Ok(summary.passed)
}

/// Full-precision float formatting shared by all CSV artifacts.
pub fn fmt_f(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Write a CSV file with the given header line and preformatted rows.
pub fn write_csv<I>(path: &Path, header: &str, rows: I) -> Result<(), CliError>
where
    I: IntoIterator,
    I::Item: AsRef<str>,
{
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut out = String::new();
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(row.as_ref());
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// A named polyline for the chart renderer.
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Minimal static SVG line chart. Axes are linear in the supplied
/// coordinates; pass logarithms for log-log plots. Output is deterministic.
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

const PALETTE: [&str; 5] = ["#1f6fb4", "#c23b22", "#2b8a3e", "#8250b0", "#b8860b"];

impl Chart {
    pub fn render(&self, path: &Path) -> Result<(), CliError> {
        let (w, h) = (640.0, 440.0);
        let (ml, mr, mt, mb) = (72.0, 24.0, 40.0, 56.0);
        let (pw, ph) = (w - ml - mr, h - mt - mb);

        let mut xs: Vec<f64> = Vec::new();
        let mut ys: Vec<f64> = Vec::new();
        for s in &self.series {
            for &(x, y) in &s.points {
                if x.is_finite() && y.is_finite() {
                    xs.push(x);
                    ys.push(y);
                }
            }
        }
        let (x0, x1) = span(&xs);
        let (y0, y1) = span(&ys);
        let px = |x: f64| ml + (x - x0) / (x1 - x0) * pw;
        let py = |y: f64| mt + ph - (y - y0) / (y1 - y0) * ph;

        let mut svg = String::new();
        svg.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" \
             viewBox=\"0 0 {w} {h}\" font-family=\"monospace\" font-size=\"12\">\n"
        ));
        svg.push_str(&format!(
            "<rect x=\"0\" y=\"0\" width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n"
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
            ml + pw / 2.0,
            escape(&self.title)
        ));
        // frame
        svg.push_str(&format!(
            "<rect x=\"{ml:.1}\" y=\"{mt:.1}\" width=\"{pw:.1}\" height=\"{ph:.1}\" \
             fill=\"none\" stroke=\"#404040\"/>\n"
        ));
        // ticks and grid
        for i in 0..=4 {
            let fx = x0 + (x1 - x0) * i as f64 / 4.0;
            let gx = px(fx);
            svg.push_str(&format!(
                "<line x1=\"{gx:.1}\" y1=\"{mt:.1}\" x2=\"{gx:.1}\" y2=\"{:.1}\" \
                 stroke=\"#d8d8d8\"/>\n",
                mt + ph
            ));
            svg.push_str(&format!(
                "<text x=\"{gx:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
                mt + ph + 18.0,
                tick(fx)
            ));
            let fy = y0 + (y1 - y0) * i as f64 / 4.0;
            let gy = py(fy);
            svg.push_str(&format!(
                "<line x1=\"{ml:.1}\" y1=\"{gy:.1}\" x2=\"{:.1}\" y2=\"{gy:.1}\" \
                 stroke=\"#d8d8d8\"/>\n",
                ml + pw
            ));
            svg.push_str(&format!(
                "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>\n",
                ml - 6.0,
                gy + 4.0,
                tick(fy)
            ));
        }
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
            ml + pw / 2.0,
            h - 14.0,
            escape(&self.x_label)
        ));
        svg.push_str(&format!(
            "<text x=\"16\" y=\"{:.1}\" text-anchor=\"middle\" \
             transform=\"rotate(-90 16 {:.1})\">{}</text>\n",
            mt + ph / 2.0,
            mt + ph / 2.0,
            escape(&self.y_label)
        ));
        // series
        for (k, s) in self.series.iter().enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            let pts: Vec<String> = s
                .points
                .iter()
                .filter(|(x, y)| x.is_finite() && y.is_finite())
                .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
                .collect();
            if pts.len() > 1 {
                svg.push_str(&format!(
                    "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" \
                     points=\"{}\"/>\n",
                    pts.join(" ")
                ));
            }
            for pt in &pts {
                let (cx, cy) = pt.split_once(',').unwrap();
                svg.push_str(&format!(
                    "<circle cx=\"{cx}\" cy=\"{cy}\" r=\"2.5\" fill=\"{color}\"/>\n"
                ));
            }
            svg.push_str(&format!(
                "<text x=\"{:.1}\" y=\"{:.1}\" fill=\"{color}\">{}</text>\n",
                ml + 10.0,
                mt + 16.0 + 16.0 * k as f64,
                escape(&s.label)
            ));
        }
        svg.push_str("</svg>\n");

        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        let mut f = fs::File::create(path)?;
        f.write_all(svg.as_bytes())?;
        Ok(())
    }
}

fn span(vals: &[f64]) -> (f64, f64) {
    let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() || !hi.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-12 * hi.abs().max(1.0) {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn tick(x: f64) -> String {
    if x == 0.0 || (x.abs() >= 0.01 && x.abs() < 1e4) {
        let s = format!("{x:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{x:.2e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Per-experiment artifact directory under the resolved output root.
pub fn experiment_dir(out_root: &Path, experiment: &str) -> PathBuf {
    out_root.join(experiment)
}
