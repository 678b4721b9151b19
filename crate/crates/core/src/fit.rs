//! Least-squares fits for scaling laws.
//!
//! Slopes of log-log data drive most verdicts in this crate: eigenfunction
//! tail exponents, integral-functional growth rates and lifespan scaling all
//! reduce to ordinary least squares on (ln x, ln y) pairs, optionally with a
//! ln ln x regressor to detect multiplicative logarithmic factors.

use crate::error::{Error, Result};

/// Ordinary least squares y ≈ slope·x + intercept.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct OlsFit {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination.
    pub r2: f64,
    /// Root-mean-square residual.
    pub rms: f64,
    /// Largest absolute residual.
    pub max_resid: f64,
}

pub fn ols(xs: &[f64], ys: &[f64]) -> Result<OlsFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::FitRefused {
            usable: xs.len(),
            needed: 2,
        });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Precondition("degenerate abscissae in fit".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    let mut max_resid = 0.0f64;
    for (x, y) in xs.iter().zip(ys) {
        let r = y - (slope * x + intercept);
        ss_res += r * r;
        ss_tot += (y - my) * (y - my);
        max_resid = max_resid.max(r.abs());
    }
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(OlsFit {
        slope,
        intercept,
        r2,
        rms: (ss_res / n).sqrt(),
        max_resid,
    })
}

/// Two-regressor least squares y ≈ a·x1 + b·x2 + c.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct Ols2Fit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub rms: f64,
}

pub fn ols2(x1: &[f64], x2: &[f64], ys: &[f64]) -> Result<Ols2Fit> {
    let n = ys.len();
    if x1.len() != n || x2.len() != n || n < 3 {
        return Err(Error::FitRefused {
            usable: n,
            needed: 3,
        });
    }
    // normal equations for the design matrix [x1 x2 1]
    let mut m = [[0.0f64; 3]; 3];
    let mut rhs = [0.0f64; 3];
    for i in 0..n {
        let row = [x1[i], x2[i], 1.0];
        for j in 0..3 {
            for k in 0..3 {
                m[j][k] += row[j] * row[k];
            }
            rhs[j] += row[j] * ys[i];
        }
    }
    let sol = solve3(m, rhs).ok_or_else(|| {
        Error::Precondition("singular normal equations in two-regressor fit".into())
    })?;
    let mut ss = 0.0;
    for i in 0..n {
        let r = ys[i] - (sol[0] * x1[i] + sol[1] * x2[i] + sol[2]);
        ss += r * r;
    }
    Ok(Ols2Fit {
        a: sol[0],
        b: sol[1],
        c: sol[2],
        rms: (ss / n as f64).sqrt(),
    })
}

fn solve3(mut m: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        b.swap(col, piv);
        for row in (col + 1)..3 {
            let f = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] -= f * m[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0f64; 3];
    for col in (0..3).rev() {
        let mut s = b[col];
        for k in (col + 1)..3 {
            s -= m[col][k] * x[k];
        }
        x[col] = s / m[col][col];
    }
    Some(x)
}

/// Power-law fit with logarithmic-factor detection on log-log data:
/// models ln y = slope·ln x + log_power·ln(ln x) + const and flags the log
/// factor when it improves the plain-fit residual decisively.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct SlopeFit {
    /// Power of x (with the log regressor when flagged, plain otherwise).
    pub slope: f64,
    /// Fitted power of ln x.
    pub log_power: f64,
    /// True when the ln ln x regressor is decisively supported.
    pub log_flag: bool,
    pub rms_plain: f64,
    pub rms_log: f64,
    pub r2: f64,
}

/// Fit ln y against ln x with optional ln ln x factor. Needs x > e so that
/// ln ln x is defined and positive.
pub fn slope_with_log_factor(ln_x: &[f64], ln_y: &[f64]) -> Result<SlopeFit> {
    if ln_x.iter().any(|&v| v <= 1.0) {
        return Err(Error::Precondition(
            "log-factor fits need abscissae with ln x > 1".into(),
        ));
    }
    let plain = ols(ln_x, ln_y)?;
    let lnln: Vec<f64> = ln_x.iter().map(|v| v.ln()).collect();
    let both = ols2(ln_x, &lnln, ln_y)?;
    // decisive: the refined model explains the residual nearly completely
    // and asks for a non-negligible log power
    let log_flag = plain.rms > 10.0 * both.rms.max(1e-12) && both.b.abs() >= 0.25;
    Ok(SlopeFit {
        slope: if log_flag { both.a } else { plain.slope },
        log_power: both.b,
        log_flag,
        rms_plain: plain.rms,
        rms_log: both.rms,
        r2: plain.r2,
    })
}
