//! Radial eigenfunctions of Δφ = (λ² + λD(r) + V(r)) φ.
//!
//! For each spectral parameter λ ≥ 0 the solver constructs the regular
//! solution of
//!
//! ```text
//!     φ'' + (n−1)/r · φ' = (λ² + λ D(r) + V(r)) φ
//! ```
//!
//! seeded at a small radius δ by the Frobenius behavior φ ≈ r^ρ with
//! ρ = rho(v0 + λ d0). Integration uses the log-derivative pair
//! (log φ, w = φ'/φ), whose Riccati equation
//!
//! ```text
//!     w' = −w² − (n−1) w / r + λ² + λD + V
//! ```
//!
//! tracks the growing solution stably and keeps e^(λr) tails representable:
//! only log φ is stored. Values in between grid nodes come from a cubic
//! Hermite interpolant of log φ in ln r (the grid is geometric, so node
//! spacing is uniform in ln r).

use std::io::Write as IoWrite;

use crate::error::{Error, Result};
use crate::exponents::rho;
use crate::ode::AdaptiveRk;
use crate::profile::CoefficientProfile;
use crate::quad::{quad, QuadOpts};

/// Solver configuration; the defaults match the published tolerances of the
/// laboratory and rarely need changing.
#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Geometric grid density.
    pub nodes_per_decade: usize,
    /// Seed radius override; default 1e−4 · min(1, 1/λ).
    pub delta: Option<f64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            rtol: 1e-10,
            atol: 1e-12,
            nodes_per_decade: 96,
            delta: None,
        }
    }
}

/// A radial eigenfunction sampled on a geometric grid, stored as
/// (log φ, d log φ / dr) to keep exponentially growing tails representable.
#[derive(Clone, Debug)]
pub struct RadialFunction {
    /// Strictly increasing radii (geometric spacing).
    pub grid: Vec<f64>,
    /// log φ at the grid radii.
    pub logvals: Vec<f64>,
    /// w = φ'/φ at the grid radii.
    pub dlogvals: Vec<f64>,
    /// Spectral parameter of this solution.
    pub lambda: f64,
    /// Space dimension.
    pub n: u32,
    /// Frobenius exponent used at the seed; also the continuation power
    /// below the first grid point.
    pub seed_rho: f64,
    /// ln of the grid radii (cached for interpolation).
    xs: Vec<f64>,
}

impl RadialFunction {
    /// log φ(r), Hermite-interpolated in ln r; power continuation below the
    /// grid, log-linear continuation (constant w) beyond it.
    pub fn log_at(&self, r: f64) -> f64 {
        assert!(r >= 0.0, "radius must be nonnegative");
        let r0 = self.grid[0];
        if r <= r0 {
            if self.seed_rho == 0.0 {
                return self.logvals[0];
            }
            if r == 0.0 {
                return f64::NEG_INFINITY;
            }
            return self.logvals[0] + self.seed_rho * (r / r0).ln();
        }
        let last = self.grid.len() - 1;
        if r >= self.grid[last] {
            return self.logvals[last] + self.dlogvals[last] * (r - self.grid[last]);
        }
        let x = r.ln();
        let i = self.xs.partition_point(|&v| v < x).clamp(1, last);
        let (x0, x1) = (self.xs[i - 1], self.xs[i]);
        let h = x1 - x0;
        let t = (x - x0) / h;
        let (y0, y1) = (self.logvals[i - 1], self.logvals[i]);
        // slopes in ln r: d log φ / d ln r = r w
        let s0 = self.grid[i - 1] * self.dlogvals[i - 1];
        let s1 = self.grid[i] * self.dlogvals[i];
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * h * s0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * h * s1
    }

    /// φ(r); may overflow to +∞ for large λr, prefer [`Self::log_at`].
    pub fn value_at(&self, r: f64) -> f64 {
        self.log_at(r).exp()
    }

    /// w(r) = φ'(r)/φ(r), from the derivative of the Hermite interpolant.
    pub fn dlog_at(&self, r: f64) -> f64 {
        let r0 = self.grid[0];
        if r <= r0 {
            return if r > 0.0 { self.seed_rho / r } else { f64::INFINITY };
        }
        let last = self.grid.len() - 1;
        if r >= self.grid[last] {
            return self.dlogvals[last];
        }
        let x = r.ln();
        let i = self.xs.partition_point(|&v| v < x).clamp(1, last);
        let (x0, x1) = (self.xs[i - 1], self.xs[i]);
        let h = x1 - x0;
        let t = (x - x0) / h;
        let (y0, y1) = (self.logvals[i - 1], self.logvals[i]);
        let s0 = self.grid[i - 1] * self.dlogvals[i - 1];
        let s1 = self.grid[i] * self.dlogvals[i];
        let t2 = t * t;
        // d/dt of the Hermite basis, then /(h·r) to get d log φ / dr
        let dy = (6.0 * t2 - 6.0 * t) * y0
            + (3.0 * t2 - 4.0 * t + 1.0) * h * s0
            + (-6.0 * t2 + 6.0 * t) * y1
            + (3.0 * t2 - 2.0 * t) * h * s1;
        dy / (h * r)
    }

    /// Largest radius covered by the grid.
    pub fn r_max(&self) -> f64 {
        *self.grid.last().unwrap()
    }

    /// Structural invariants: finite log values and near-monotonicity
    /// (r·w ≥ −tol at every node; the exact solutions are nondecreasing).
    pub fn check_invariants(&self, tol: f64) -> Result<()> {
        for ((&r, &l), &w) in self
            .grid
            .iter()
            .zip(&self.logvals)
            .zip(&self.dlogvals)
        {
            if !l.is_finite() || !w.is_finite() {
                return Err(Error::SolveFailure {
                    r,
                    reason: "non-finite stored value".into(),
                });
            }
            if r * w < -tol {
                return Err(Error::SolveFailure {
                    r,
                    reason: format!("log-derivative r·w = {} dips below -{tol}", r * w),
                });
            }
        }
        Ok(())
    }

    /// Maximum relative residual of the Riccati equation over interior grid
    /// nodes, with w' from non-uniform centered differences. Quantifies how
    /// well the stored samples satisfy the ODE independently of the
    /// integrator's own error control.
    pub fn ode_residual(&self, profile: &CoefficientProfile) -> f64 {
        let n1 = (self.n - 1) as f64;
        let lam = self.lambda;
        let mut worst = 0.0f64;
        for k in 1..self.grid.len() - 1 {
            let (rm, r0, rp) = (self.grid[k - 1], self.grid[k], self.grid[k + 1]);
            let (wm, w0, wp) = (self.dlogvals[k - 1], self.dlogvals[k], self.dlogvals[k + 1]);
            let hm = r0 - rm;
            let hp = rp - r0;
            let dw = (hm * hm * wp + (hp * hp - hm * hm) * w0 - hp * hp * wm)
                / (hm * hp * (hm + hp));
            let q = lam * lam
                + lam * profile.damping_at(r0)
                + profile.potential_at(r0);
            let resid = dw + w0 * w0 + n1 * w0 / r0 - q;
            let scale = dw
                .abs()
                .max(w0 * w0)
                .max((n1 * w0 / r0).abs())
                .max(q.abs())
                .max(1e-300);
            worst = worst.max(resid.abs() / scale);
        }
        worst
    }
}

/// Frobenius seed (φ(δ), φ'(δ)) of the regular solution at a small radius.
///
/// The effective local index is v_eff = v0 + λ·d0 and the regular branch is
/// φ ≈ δ^ρ with ρ = rho(v_eff). When the profile declares an analytic local
/// series, the truncated Frobenius series (order 8) refines the seed; this
/// matters for n = 2, v0 = 0, where the second solution is logarithmic.
pub fn frobenius_seed(
    profile: &CoefficientProfile,
    lambda: f64,
    delta: f64,
) -> Result<(f64, f64)> {
    if !(delta > 0.0) {
        return Err(Error::Precondition("seed radius must be positive".into()));
    }
    let v_eff = profile.v0 + lambda * profile.d0;
    let rho_eff = rho(v_eff, profile.n)?;
    let n = profile.n as f64;
    match &profile.local_series {
        None => {
            let val = delta.powf(rho_eff);
            Ok((val, rho_eff * val / delta))
        }
        Some(series) => {
            // recursion a_j = (Σ_{k=1..j} c_k a_{j−k}) / (j (j + 2ρ + n − 2)),
            // c_k the r^k coefficient of r²(V + λD) − v_eff; λ² enters at k=2
            const ORDER: usize = 8;
            let coeff = |k: usize| -> f64 {
                let v = series.v_coeffs.get(k - 1).copied().unwrap_or(0.0);
                let d = series.d_coeffs.get(k - 1).copied().unwrap_or(0.0);
                let sq = if k == 2 { lambda * lambda } else { 0.0 };
                v + lambda * d + sq
            };
            let mut a = [0.0f64; ORDER + 1];
            a[0] = 1.0;
            for j in 1..=ORDER {
                let mut s = 0.0;
                for k in 1..=j {
                    s += coeff(k) * a[j - k];
                }
                a[j] = s / (j as f64 * (j as f64 + 2.0 * rho_eff + n - 2.0));
            }
            let mut sum = 0.0;
            let mut dsum = 0.0;
            for (j, &aj) in a.iter().enumerate() {
                let term = aj * delta.powi(j as i32);
                sum += term;
                dsum += (rho_eff + j as f64) * term;
            }
            let scale = delta.powf(rho_eff);
            Ok((scale * sum, scale * dsum / delta))
        }
    }
}

/// Construct the regular eigenfunction up to `r_max`.
///
/// For λ > 0 the result is normalized to φ(1/λ) = 1 (the natural matching
/// point of the near and far regimes); for λ = 0 the Frobenius normalization
/// φ(δ) = δ^ρ is kept. Requires r_max ≥ 10·max(1, 1/λ) so the tail fit and
/// the normalization point are interior.
pub fn solve_phi(
    profile: &CoefficientProfile,
    lambda: f64,
    r_max: f64,
) -> Result<RadialFunction> {
    solve_phi_with(profile, lambda, r_max, &SolveOptions::default())
}

/// [`solve_phi`] with explicit options.
pub fn solve_phi_with(
    profile: &CoefficientProfile,
    lambda: f64,
    r_max: f64,
    opts: &SolveOptions,
) -> Result<RadialFunction> {
    if lambda < 0.0 {
        return Err(Error::Precondition("lambda must be nonnegative".into()));
    }
    let scale = if lambda > 0.0 { (1.0 / lambda).max(1.0) } else { 1.0 };
    if r_max < 10.0 * scale {
        return Err(Error::Precondition(format!(
            "r_max = {r_max} too small; need at least {}",
            10.0 * scale
        )));
    }
    let delta = opts
        .delta
        .unwrap_or_else(|| 1e-4 * (1.0f64).min(if lambda > 0.0 { 1.0 / lambda } else { 1.0 }));

    // reject coefficients more singular than r^-2: the scaled values r²D,
    // r²V must not keep growing as the probe radius shrinks below δ
    for (name, f) in [("D", &profile.damping), ("V", &profile.potential)] {
        let s1 = delta * delta * f.eval(delta);
        let s2 = (delta / 10.0) * (delta / 10.0) * f.eval(delta / 10.0);
        if !s1.is_finite() || !s2.is_finite() || s2.abs() > 1.5 * s1.abs().max(10.0) {
            return Err(Error::InvalidProfile(format!(
                "{name} is more singular than r^-2 near the origin (r²{name}: {s1} -> {s2})"
            )));
        }
    }

    let (phi0, dphi0) = frobenius_seed(profile, lambda, delta)?;
    let w0 = dphi0 / phi0;
    let y0 = [phi0.ln(), w0];

    // geometric grid from δ to r_max
    let decades = (r_max / delta).log10();
    let count = ((decades * opts.nodes_per_decade as f64).ceil() as usize).max(8);
    let ratio = (r_max / delta).powf(1.0 / count as f64);
    let mut grid = Vec::with_capacity(count + 1);
    let mut r = delta;
    grid.push(r);
    for _ in 0..count {
        r *= ratio;
        grid.push(r.min(r_max));
    }
    *grid.last_mut().unwrap() = r_max;

    let n1 = (profile.n - 1) as f64;
    let rhs = move |r: f64, y: &[f64; 2]| -> [f64; 2] {
        let w = y[1];
        let q = lambda * lambda + lambda * profile.damping_at(r) + profile.potential_at(r);
        [w, -w * w - n1 * w / r + q]
    };
    let rk = AdaptiveRk {
        rtol: opts.rtol,
        atol: opts.atol,
        ..Default::default()
    };
    let states = rk.run(&rhs, delta, y0, &grid[1..])?;

    let mut logvals = Vec::with_capacity(grid.len());
    let mut dlogvals = Vec::with_capacity(grid.len());
    logvals.push(y0[0]);
    dlogvals.push(y0[1]);
    for s in states {
        logvals.push(s[0]);
        dlogvals.push(s[1]);
    }
    let xs: Vec<f64> = grid.iter().map(|r| r.ln()).collect();
    let mut f = RadialFunction {
        grid,
        logvals,
        dlogvals,
        lambda,
        n: profile.n,
        seed_rho: rho(profile.v0 + lambda * profile.d0, profile.n)?,
        xs,
    };
    if lambda > 0.0 {
        let shift = f.log_at(1.0 / lambda);
        for v in &mut f.logvals {
            *v -= shift;
        }
    }
    f.check_invariants(1e-8)?;
    Ok(f)
}

/// Asymptotic model fitted to a tail.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TailModel {
    /// log φ ≈ c ln r + const (λ = 0 regime).
    Power,
    /// log φ ≈ a r + c ln r + const (λ > 0 regime).
    ExpPower,
}

/// Result of a tail fit over the outer half of the grid.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct AsymptoticFit {
    /// Fitted power of r.
    pub exponent_estimate: f64,
    /// Fitted exponential rate (0 for the pure power model).
    pub exp_rate_estimate: f64,
    /// Largest absolute deviation of log φ from the fit over the window.
    pub residual: f64,
    /// Fit window (first radius, last radius).
    pub fit_window: (f64, f64),
}

/// Least-squares tail fit of log φ against (r, ln r) over the outer half of
/// the grid (outer half in ln r; the grid is geometric).
pub fn fit_asymptotics(f: &RadialFunction, model: TailModel) -> Result<AsymptoticFit> {
    let lo = f.grid.len() / 2;
    let window = &f.grid[lo..];
    let logs = &f.logvals[lo..];
    match model {
        TailModel::Power => {
            if f.r_max() < 100.0 {
                return Err(Error::Precondition(
                    "power-tail fits need a grid reaching r >= 100".into(),
                ));
            }
            let xs: Vec<f64> = window.iter().map(|r| r.ln()).collect();
            let fit = crate::fit::ols(&xs, logs)?;
            Ok(AsymptoticFit {
                exponent_estimate: fit.slope,
                exp_rate_estimate: 0.0,
                residual: fit.max_resid,
                fit_window: (window[0], *window.last().unwrap()),
            })
        }
        TailModel::ExpPower => {
            if f.r_max() < 50.0 / f.lambda.max(1.0) {
                return Err(Error::Precondition(format!(
                    "exp-tail fits need a grid reaching r >= {}",
                    50.0 / f.lambda.max(1.0)
                )));
            }
            let lnr: Vec<f64> = window.iter().map(|r| r.ln()).collect();
            let fit = crate::fit::ols2(window, &lnr, logs)?;
            let mut max_resid = 0.0f64;
            for ((&r, &x), &y) in window.iter().zip(&lnr).zip(logs) {
                max_resid = max_resid.max((y - (fit.a * r + fit.b * x + fit.c)).abs());
            }
            Ok(AsymptoticFit {
                exponent_estimate: fit.b,
                exp_rate_estimate: fit.a,
                residual: max_resid,
                fit_window: (window[0], *window.last().unwrap()),
            })
        }
    }
}

/// Empirical two-sided comparison against the envelope
/// ⟨λr⟩^(−(n−1)/2) e^(λr) for a family of spectral parameters.
#[derive(Clone, Debug, serde::Serialize)]
pub struct UniformBoundReport {
    /// Smallest ratio φ_λ(r) / envelope over all λ and grid radii λr ≤ 20.
    pub c_lower: f64,
    /// Largest such ratio.
    pub c_upper: f64,
    /// c_upper / c_lower.
    pub spread: f64,
    /// Per-λ (λ, min ratio, max ratio).
    pub per_lambda: Vec<(f64, f64, f64)>,
}

/// Check the family bound c ≤ φ_λ(r)/(⟨λr⟩^(−(n−1)/2) e^(λr)) ≤ 1/c on
/// λr ∈ (0, 20] for scattering profiles (0 ≤ D ≤ mu(1+r)^(−beta), β > 1,
/// V ≡ 0), with each φ_λ normalized at r = 1/λ.
pub fn uniform_bound_check(
    profile: &CoefficientProfile,
    lambdas: &[f64],
) -> Result<UniformBoundReport> {
    if !profile.is_scattering() {
        return Err(Error::Precondition(
            "uniform bound check needs a scattering profile".into(),
        ));
    }
    if lambdas.iter().any(|&l| l <= 0.0 || l > 1.0) {
        return Err(Error::Precondition(
            "spectral parameters must lie in (0, 1]".into(),
        ));
    }
    let quarter = (profile.n - 1) as f64 / 4.0;
    let mut c_lower = f64::INFINITY;
    let mut c_upper = f64::NEG_INFINITY;
    let mut per_lambda = Vec::new();
    for &lam in lambdas {
        let f = solve_phi(profile, lam, 20.5 / lam)?;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (&r, &l) in f.grid.iter().zip(&f.logvals) {
            let u = lam * r;
            if u > 20.0 {
                break;
            }
            // log of φ / (⟨u⟩^(−(n−1)/2) e^u)
            let log_ratio = l - u + quarter * (1.0 + u * u).ln();
            lo = lo.min(log_ratio);
            hi = hi.max(log_ratio);
        }
        per_lambda.push((lam, lo.exp(), hi.exp()));
        c_lower = c_lower.min(lo.exp());
        c_upper = c_upper.max(hi.exp());
    }
    Ok(UniformBoundReport {
        c_lower,
        c_upper,
        spread: c_upper / c_lower,
        per_lambda,
    })
}

/// Relative closure error of the flux identity
/// r^(n−1) φ₀'(r) − δ^(n−1) φ₀'(δ) = ∫_δ^r τ^(n−1) V(τ) φ₀(τ) dτ
/// at a set of radii, for a λ = 0 eigenfunction.
pub fn integral_identity_error(
    profile: &CoefficientProfile,
    phi0: &RadialFunction,
    radii: &[f64],
) -> Result<f64> {
    if phi0.lambda != 0.0 {
        return Err(Error::Precondition(
            "the flux identity applies to the λ = 0 eigenfunction".into(),
        ));
    }
    let n1 = (profile.n - 1) as i32;
    let delta = phi0.grid[0];
    let base = delta.powi(n1) * phi0.dlog_at(delta) * phi0.value_at(delta);
    let mut worst = 0.0f64;
    for &r in radii {
        if r <= delta || r > phi0.r_max() {
            return Err(Error::Precondition(format!(
                "identity radius {r} outside the grid"
            )));
        }
        let lhs = r.powi(n1) * phi0.dlog_at(r) * phi0.value_at(r) - base;
        let rhs = quad(
            &|t| t.powi(n1) * profile.potential_at(t) * phi0.value_at(t),
            delta,
            r,
            &QuadOpts::with_rtol(1e-9),
        )?;
        let scale = lhs.abs().max(rhs.abs()).max(1e-300);
        worst = worst.max((lhs - rhs).abs() / scale);
    }
    Ok(worst)
}

/// Write `r,phi,dphi_over_phi` rows at 17 significant digits.
pub fn serialize_radial(f: &RadialFunction, out: &mut dyn IoWrite) -> std::io::Result<()> {
    writeln!(out, "r,phi,dphi_over_phi")?;
    for ((&r, &l), &w) in f.grid.iter().zip(&f.logvals).zip(&f.dlogvals) {
        writeln!(out, "{:.16e},{:.16e},{:.16e}", r, l.exp(), w)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{LocalSeries, RadialFn};
    use approx::assert_relative_eq;

    fn euler_profile(v: f64) -> CoefficientProfile {
        let mut p = CoefficientProfile::new(
            3,
            RadialFn::zero(),
            RadialFn::new(move |r| v / (r * r)),
            v,
            0.0,
            v,
            0.0,
            2.0,
            "euler",
        );
        p.radius = 1.0;
        p
    }

    #[test]
    fn seed_matches_euler_power() {
        let p = euler_profile(2.0);
        let (val, dval) = frobenius_seed(&p, 0.0, 1e-4).unwrap();
        // rho(2) = 1 in n = 3
        assert_relative_eq!(val, 1e-4, max_relative = 1e-14);
        assert_relative_eq!(dval, 1.0, max_relative = 1e-14);
    }

    #[test]
    fn seed_series_reproduces_bj_over_j_squared() {
        // n = 2, v0 = 0, r²V = b_3 r³: the series solution starts
        // 1 + (b_3/9) r³, so φ'(δ) ≈ (b_3/3) δ²
        let b3 = 0.7;
        let mut p = CoefficientProfile::new(
            2,
            RadialFn::zero(),
            RadialFn::new(move |r| b3 * r),
            0.0,
            0.0,
            0.0,
            0.0,
            2.0,
            "series-test",
        );
        p.local_series = Some(LocalSeries {
            v_coeffs: vec![0.0, 0.0, b3],
            d_coeffs: vec![],
        });
        let delta = 1e-3;
        let (val, dval) = frobenius_seed(&p, 0.0, delta).unwrap();
        assert_relative_eq!(val, 1.0 + b3 / 9.0 * delta.powi(3), max_relative = 1e-12);
        assert_relative_eq!(dval, b3 / 3.0 * delta * delta, max_relative = 1e-6);
    }

    #[test]
    fn euler_potential_reproduced_globally() {
        // V = 2/r², n = 3: φ = r exactly (Frobenius normalization)
        let p = euler_profile(2.0);
        let f = solve_phi(&p, 0.0, 30.0).unwrap();
        for (&r, &l) in f.grid.iter().zip(&f.logvals) {
            assert_relative_eq!(l, r.ln(), epsilon = 1e-8);
        }
        // interpolated values too
        for r in [3.7e-3, 0.11, 2.3, 17.9] {
            assert_relative_eq!(f.value_at(r), r, max_relative = 1e-8);
        }
    }

    #[test]
    fn free_massive_mode_is_sinh_over_r() {
        // D = V = 0, n = 3, λ = 1: φ = sinh(r)/r up to normalization at
        // r = 1/λ = 1
        let p = CoefficientProfile::free(3);
        let f = solve_phi(&p, 1.0, 30.0).unwrap();
        let norm = 1.0f64.sinh();
        for r in [1e-3f64, 0.05, 0.7, 1.0, 5.0, 14.0, 29.0] {
            let expected = if r < 1e-2 {
                // series to avoid cancellation in the reference itself
                (1.0 + r * r / 6.0 + r.powi(4) / 120.0) / norm
            } else {
                r.sinh() / r / norm
            };
            assert_relative_eq!(f.value_at(r), expected, max_relative = 1e-6);
        }
    }

    #[test]
    fn trivial_coefficients_give_constant_phi0() {
        for n in [2u32, 3, 4] {
            let p = CoefficientProfile::free(n);
            let f = solve_phi(&p, 0.0, 50.0).unwrap();
            for &l in &f.logvals {
                assert!(l.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn normalization_at_inverse_lambda() {
        let p = CoefficientProfile::scattering(3, 1.0, 2.0);
        for lam in [1.0, 0.25, 0.05] {
            let f = solve_phi(&p, lam, 25.0 / lam).unwrap();
            assert_relative_eq!(f.log_at(1.0 / lam), 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn r_max_precondition() {
        let p = CoefficientProfile::free(3);
        assert!(solve_phi(&p, 0.1, 20.0).is_err());
        assert!(solve_phi(&p, 0.1, 150.0).is_ok());
    }

    #[test]
    fn too_singular_profile_rejected() {
        let mut p = CoefficientProfile::free(3);
        p.potential = RadialFn::new(|r| 0.1 / (r * r * r));
        assert!(matches!(
            solve_phi(&p, 0.0, 30.0),
            Err(Error::InvalidProfile(_))
        ));
    }

    #[test]
    fn tail_fit_recovers_shifted_power() {
        // V with v_inf = 2 but bounded at the origin: tail exponent rho(2)=1
        let mut p = CoefficientProfile::new(
            3,
            RadialFn::zero(),
            RadialFn::new(|r| 2.0 / (1.0 + r * r)),
            0.0,
            0.0,
            2.0,
            0.0,
            2.0,
            "shifted-tail",
        );
        p.limit_tol = 0.05;
        // large r_max pushes the outer-half fit window past the crossover
        // region of the potential
        let f = solve_phi(&p, 0.0, 1e5).unwrap();
        let fit = fit_asymptotics(&f, TailModel::Power).unwrap();
        assert_relative_eq!(fit.exponent_estimate, 1.0, epsilon = 0.02);
    }

    #[test]
    fn exp_tail_fit_free_profile() {
        // sinh(r)/r: rate 1, power -1. The fit window is the outer half of
        // the grid in ln r, so r_max is chosen large enough that the window
        // starts past the sinh/exp transient.
        let p = CoefficientProfile::free(3);
        let f = solve_phi(&p, 1.0, 4e5).unwrap();
        let fit = fit_asymptotics(&f, TailModel::ExpPower).unwrap();
        assert_relative_eq!(fit.exp_rate_estimate, 1.0, epsilon = 1e-6);
        assert_relative_eq!(fit.exponent_estimate, -1.0, epsilon = 1e-3);
    }

    #[test]
    fn exp_tail_fit_2d_bessel_power() {
        // n = 2 free: φ ∝ I_0(λ r) ~ e^(λr) r^(-1/2)
        let p = CoefficientProfile::free(2);
        let f = solve_phi(&p, 1.0, 4e5).unwrap();
        let fit = fit_asymptotics(&f, TailModel::ExpPower).unwrap();
        assert_relative_eq!(fit.exp_rate_estimate, 1.0, epsilon = 1e-6);
        assert_relative_eq!(fit.exponent_estimate, -0.5, epsilon = 2e-3);
    }

    #[test]
    fn uniform_bound_free_family() {
        let p = CoefficientProfile::free(3);
        let rep = uniform_bound_check(&p, &[1.0, 0.3, 0.1]).unwrap();
        // analytic envelope ratio for sinh(u)/u/sinh(1): min ~ 0.43, max ~ 0.85
        assert!(rep.spread < 2.5, "spread = {}", rep.spread);
        assert!(rep.c_lower > 0.3 && rep.c_upper < 1.0);
    }

    #[test]
    fn uniform_bound_needs_scattering_profile() {
        let p = CoefficientProfile::gkw(1.0);
        assert!(uniform_bound_check(&p, &[0.5]).is_err());
        let p = CoefficientProfile::free(3);
        assert!(uniform_bound_check(&p, &[1.5]).is_err());
    }

    #[test]
    fn flux_identity_closes() {
        let mut p = CoefficientProfile::new(
            3,
            RadialFn::zero(),
            RadialFn::new(|r| 2.0 / (1.0 + r * r)),
            0.0,
            0.0,
            2.0,
            0.0,
            2.0,
            "flux-test",
        );
        p.limit_tol = 0.05;
        let f = solve_phi(&p, 0.0, 1e3).unwrap();
        let err = integral_identity_error(&p, &f, &[0.5, 5.0, 50.0, 500.0]).unwrap();
        assert!(err < 1e-6, "flux identity error {err}");
    }

    #[test]
    fn log_growth_in_2d_short_range() {
        // n = 2, nontrivial short-range V: φ₀ grows like ln r
        let mut p = CoefficientProfile::new(
            2,
            RadialFn::zero(),
            RadialFn::new(|r| 1.0 / (1.0 + r * r).powf(1.5)),
            0.0,
            0.0,
            0.0,
            0.0,
            2.0,
            "log-growth",
        );
        p.local_series = Some(LocalSeries {
            v_coeffs: vec![0.0, 1.0],
            d_coeffs: vec![],
        });
        let f = solve_phi(&p, 0.0, 1e4).unwrap();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (&r, &l) in f.grid.iter().zip(&f.logvals) {
            if r < 10.0 {
                continue;
            }
            let ratio = l.exp() / (2.0 + r).ln();
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        assert!(hi / lo < 20.0, "log-envelope spread {}", hi / lo);
        // and it must actually grow
        assert!(f.value_at(1e4) > 2.0 * f.value_at(10.0));
    }

    #[test]
    fn transformed_solution_increasing_beyond_matching_point() {
        // y = r^((n-1)/2) φ has y' > 0 past r = 1/λ
        let p = CoefficientProfile::scattering(3, 1.0, 2.0);
        let lam = 0.2;
        let f = solve_phi(&p, lam, 200.0).unwrap();
        for (&r, &w) in f.grid.iter().zip(&f.dlogvals) {
            if r >= 1.0 / lam {
                assert!(w + 1.0 / r > 0.0, "y' <= 0 at r = {r}");
            }
        }
    }

    #[test]
    fn refinement_stability() {
        let p = CoefficientProfile::gkw(1.0);
        let a = solve_phi(&p, 1.0, 100.0).unwrap();
        let tight = SolveOptions {
            rtol: 5e-11,
            atol: 5e-13,
            ..Default::default()
        };
        let b = solve_phi_with(&p, 1.0, 100.0, &tight).unwrap();
        // log φ(100) ≈ 100, so 1e-5 absolute is ~1e-7 relative
        let da = a.log_at(100.0) - b.log_at(100.0);
        assert!(da.abs() < 1e-5, "tolerance sensitivity {da}");
    }

    #[test]
    fn ode_residual_small() {
        let p = CoefficientProfile::gkw(1.0);
        let f = solve_phi(&p, 1.0, 100.0).unwrap();
        let res = f.ode_residual(&p);
        assert!(res < 1e-2, "interior residual {res}");
    }

    #[test]
    fn csv_roundtrip_precision() {
        let p = euler_profile(2.0);
        let f = solve_phi(&p, 0.0, 30.0).unwrap();
        let mut buf = Vec::new();
        serialize_radial(&f, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "r,phi,dphi_over_phi");
        for (line, ((&r, &l), &w)) in lines.zip(f.grid.iter().zip(&f.logvals).zip(&f.dlogvals)) {
            let mut parts = line.split(',');
            let rr: f64 = parts.next().unwrap().parse().unwrap();
            let pp: f64 = parts.next().unwrap().parse().unwrap();
            let ww: f64 = parts.next().unwrap().parse().unwrap();
            assert_relative_eq!(rr, r, max_relative = 1e-15);
            assert_relative_eq!(pp, l.exp(), max_relative = 1e-15);
            assert_relative_eq!(ww, w, max_relative = 1e-15);
        }
    }
}
