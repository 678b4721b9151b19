//! Time-dependent test functions and their integral functionals.
//!
//! The blow-up machinery pairs the equation with test functions built from
//! the radial modes φ_λ:
//!
//! * Φ_λ(t, r) = e^(−λt) φ_λ(r), an exact solution of the dual equation;
//! * Ψ_λ = η_T^(2p') Φ_λ, its cutoff version with the C² bump η;
//! * b_q(t, r) = ∫₀¹ e^(−λt) φ_λ(r) λ^(q−1) dλ, the kernels used at the
//!   critical power, satisfying ∂_t b_q = −b_(q+1) and a two-sided
//!   (t+R)^(−q) sandwich.
//!
//! The module evaluates these objects and numerically verifies the integral
//! estimates they obey: the b_q bounds, the exponential-concentration
//! inequality, the T-growth rates of the functionals F₀ and F₁, the data
//! functionals C₁/C₂, and the space-time duality identity satisfied by
//! simulated solutions.

use std::f64::consts::PI;

use crate::eigen::{solve_phi, RadialFunction};
use crate::error::{Error, Result};
use crate::fit::{slope_with_log_factor, SlopeFit};
use crate::profile::CoefficientProfile;
use crate::quad::{log_quad, log_quad_decades, quad, QuadOpts};
use crate::sim::Trajectory;

/// Surface area of the unit sphere in ℝⁿ.
pub fn sphere_area(n: u32) -> f64 {
    // 2 π^(n/2) / Γ(n/2), with Γ reduced to Γ(1) = 1 or Γ(1/2) = √π
    let mut x = n as f64 / 2.0;
    let mut g = 1.0;
    while x > 1.0 {
        x -= 1.0;
        g *= x;
    }
    if (x - 0.5).abs() < 1e-12 {
        g *= PI.sqrt();
    }
    2.0 * PI.powf(n as f64 / 2.0) / g
}

// ---------------------------------------------------------------------------
// cutoff bump
// ---------------------------------------------------------------------------

/// C² cutoff: 1 for t ≤ T/2, 0 for t ≥ T, quintic smoothstep in between.
pub fn eta(t: f64, t_horizon: f64) -> f64 {
    assert!(t_horizon > 0.0, "cutoff horizon must be positive");
    let s = t / t_horizon;
    if s <= 0.5 {
        1.0
    } else if s >= 1.0 {
        0.0
    } else {
        let x = 2.0 * s - 1.0;
        (1.0 - x).powi(3) * (6.0 * x * x + 3.0 * x + 1.0)
    }
}

/// dη/dt; the quintic has derivative −30x²(1−x)² on the transition.
pub fn eta_d1(t: f64, t_horizon: f64) -> f64 {
    let s = t / t_horizon;
    if s <= 0.5 || s >= 1.0 {
        0.0
    } else {
        let x = 2.0 * s - 1.0;
        -30.0 * x * x * (1.0 - x) * (1.0 - x) * 2.0 / t_horizon
    }
}

/// d²η/dt².
pub fn eta_d2(t: f64, t_horizon: f64) -> f64 {
    let s = t / t_horizon;
    if s <= 0.5 || s >= 1.0 {
        0.0
    } else {
        let x = 2.0 * s - 1.0;
        -60.0 * x * (1.0 - x) * (1.0 - 2.0 * x) * 4.0 / (t_horizon * t_horizon)
    }
}

/// (η^k, ∂_t η^k, ∂_t² η^k) for an exponent k ≥ 2; the powers keep the
/// second derivative continuous through η = 0.
pub fn eta_pow_derivs(t: f64, t_horizon: f64, k: f64) -> (f64, f64, f64) {
    debug_assert!(k >= 2.0);
    let e = eta(t, t_horizon);
    if e <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let e1 = eta_d1(t, t_horizon);
    let e2 = eta_d2(t, t_horizon);
    let g = e.powf(k);
    let g1 = k * e.powf(k - 1.0) * e1;
    let g2 = k * (k - 1.0) * e.powf(k - 2.0) * e1 * e1 + k * e.powf(k - 1.0) * e2;
    (g, g1, g2)
}

// ---------------------------------------------------------------------------
// cached φ_λ family
// ---------------------------------------------------------------------------

/// Cache of radial modes φ_λ at log-spaced spectral nodes, with monotone
/// cubic interpolation of log φ in ln λ between nodes and the long-wave
/// scaling φ_λ(r) ≈ φ_(λmin)(r λ/λmin) below the smallest node.
pub struct PhiFamily {
    lambdas: Vec<f64>,
    phis: Vec<RadialFunction>,
    pub lambda_min: f64,
    pub r_max: f64,
    pub n: u32,
}

fn pchip_interior(dm: f64, dp: f64) -> f64 {
    if dm * dp <= 0.0 {
        0.0
    } else {
        2.0 * dm * dp / (dm + dp)
    }
}

fn pchip_endpoint(d_near: f64, d_far: f64) -> f64 {
    let m = 0.5 * (3.0 * d_near - d_far);
    if m * d_near <= 0.0 {
        0.0
    } else if d_near * d_far < 0.0 && m.abs() > 3.0 * d_near.abs() {
        3.0 * d_near
    } else {
        m
    }
}

impl PhiFamily {
    /// Solve and cache `count` modes at log-spaced λ ∈ [lambda_min, 1].
    pub fn build(
        profile: &CoefficientProfile,
        r_max: f64,
        lambda_min: f64,
        count: usize,
    ) -> Result<Self> {
        if !(0.0 < lambda_min && lambda_min < 1.0) {
            return Err(Error::Precondition(
                "lambda_min must lie in (0, 1)".into(),
            ));
        }
        if count < 4 {
            return Err(Error::Precondition(
                "the spectral cache needs at least 4 nodes".into(),
            ));
        }
        if r_max < 10.0 / lambda_min {
            return Err(Error::Precondition(format!(
                "family r_max = {r_max} too small for lambda_min = {lambda_min}; need {}",
                10.0 / lambda_min
            )));
        }
        let x0 = lambda_min.ln();
        let lambdas: Vec<f64> = (0..count)
            .map(|i| {
                if i + 1 == count {
                    1.0
                } else {
                    (x0 * (1.0 - i as f64 / (count - 1) as f64)).exp()
                }
            })
            .collect();
        let mut phis = Vec::with_capacity(count);
        for &lam in &lambdas {
            phis.push(solve_phi(profile, lam, r_max)?);
        }
        Ok(PhiFamily {
            lambdas,
            phis,
            lambda_min,
            r_max,
            n: profile.n,
        })
    }

    /// The cached node values.
    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// Exact cached mode at a node value of λ (1.0 is always a node).
    pub fn node_phi(&self, lambda: f64) -> Option<&RadialFunction> {
        self.lambdas
            .iter()
            .position(|&l| (l - lambda).abs() <= 1e-14 * lambda.max(1e-300))
            .map(|i| &self.phis[i])
    }

    /// log φ_λ(r) for λ ∈ [0, 1].
    pub fn log_phi(&self, lambda: f64, r: f64) -> f64 {
        assert!(
            (0.0..=1.0 + 1e-12).contains(&lambda),
            "spectral parameter {lambda} outside [0, 1]"
        );
        let lam = lambda.min(1.0);
        if lam < self.lambda_min {
            // long-wave scaling through the smallest cached mode
            return self.phis[0].log_at(r * lam / self.lambda_min);
        }
        let count = self.lambdas.len();
        let x0 = self.lambda_min.ln();
        let h = -x0 / (count - 1) as f64;
        let x = lam.ln();
        let i = (((x - x0) / h).floor() as usize).min(count - 2);
        let y = |j: usize| self.phis[j].log_at(r);
        let (yi, yj) = (y(i), y(i + 1));
        let d_mid = (yj - yi) / h;
        let m_i = if i == 0 {
            let d_next = (y(2) - yj) / h;
            pchip_endpoint(d_mid, d_next)
        } else {
            let d_prev = (yi - y(i - 1)) / h;
            pchip_interior(d_prev, d_mid)
        };
        let m_j = if i + 2 == count {
            let d_prev = (yi - y(i - 1)) / h;
            pchip_endpoint(d_mid, d_prev)
        } else {
            let d_next = (y(i + 2) - yj) / h;
            pchip_interior(d_mid, d_next)
        };
        let t = (x - (x0 + i as f64 * h)) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * yi
            + (t3 - 2.0 * t2 + t) * h * m_i
            + (-2.0 * t3 + 3.0 * t2) * yj
            + (t3 - t2) * h * m_j
    }
}

// ---------------------------------------------------------------------------
// the field object: φ cache + kernel/cutoff parameters
// ---------------------------------------------------------------------------

/// Bundle of the spectral cache with the kernel order q, cutoff horizon T,
/// nonlinearity power p, and data support radius R.
pub struct TestFunctionField {
    pub family: PhiFamily,
    /// The λ = 0 mode (potential-only).
    pub phi0: RadialFunction,
    pub q: f64,
    pub t_horizon: f64,
    pub p: f64,
    pub r_support: f64,
    pub profile: CoefficientProfile,
}

impl TestFunctionField {
    pub fn new(
        profile: &CoefficientProfile,
        q: f64,
        t_horizon: f64,
        p: f64,
        r_support: f64,
    ) -> Result<Self> {
        if !(q > 0.0) {
            return Err(Error::Precondition("kernel order q must be positive".into()));
        }
        if !(t_horizon > 2.0) {
            return Err(Error::Precondition("cutoff horizon must exceed 2".into()));
        }
        if !(p > 1.0) {
            return Err(Error::Precondition("power p must exceed 1".into()));
        }
        if !(r_support > 0.0) {
            return Err(Error::Precondition("support radius must be positive".into()));
        }
        let lambda_min = 1e-4f64;
        let r_max = (10.0 / lambda_min).max(2.0 * (t_horizon + r_support));
        let family = PhiFamily::build(profile, r_max, lambda_min, 64)?;
        let phi0 = solve_phi(profile, 0.0, r_max)?;
        Ok(TestFunctionField {
            family,
            phi0,
            q,
            t_horizon,
            p,
            r_support,
            profile: profile.clone(),
        })
    }

    /// Conjugate exponent p' = p/(p−1).
    pub fn pprime(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    /// b_q(t, r) at the field's kernel order.
    pub fn bq(&self, t: f64, r: f64) -> Result<f64> {
        self.bq_order(self.q, t, r)
    }

    /// b_q(t, r) at an explicit order (used for the ∂_t b_q = −b_(q+1)
    /// identity).
    pub fn bq_order(&self, q: f64, t: f64, r: f64) -> Result<f64> {
        self.bq_order_rtol(q, t, r, 1e-8)
    }

    /// b_q with an explicit quadrature tolerance.
    pub fn bq_order_rtol(&self, q: f64, t: f64, r: f64, rtol: f64) -> Result<f64> {
        if !(q > 0.0) {
            return Err(Error::Precondition("kernel order q must be positive".into()));
        }
        if t < 0.0 || r < 0.0 {
            return Err(Error::Precondition(
                "kernel arguments must be nonnegative".into(),
            ));
        }
        if r > self.family.r_max {
            return Err(Error::Precondition(format!(
                "radius {r} beyond the cached range {}",
                self.family.r_max
            )));
        }
        let opts = QuadOpts::with_rtol(rtol);
        // decade splits keep the e^(−λt) concentration scale ~ 1/t visible
        // to the adaptive quadrature at every t
        let log_val = if q < 1.0 {
            // remove the λ^(q−1) endpoint singularity with λ = s^(1/q):
            // b_q = (1/q) ∫₀¹ e^(−λ(s) t) φ_λ(s)(r) ds
            let g = |s: f64| {
                if s <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                let lam = s.powf(1.0 / q);
                -lam * t + self.family.log_phi(lam, r) - q.ln()
            };
            log_quad_decades(&g, 1e-6, 1.0, &opts)?
        } else {
            let g = |lam: f64| {
                if lam <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                let tail = if (q - 1.0).abs() < 1e-15 {
                    0.0
                } else {
                    (q - 1.0) * lam.ln()
                };
                -lam * t + self.family.log_phi(lam, r) + tail
            };
            log_quad_decades(&g, 1e-6, 1.0, &opts)?
        };
        let v = log_val.exp();
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::QuadratureFailure(format!(
                "b_q({t}, {r}) evaluated to {v}"
            )));
        }
        Ok(v)
    }
}

/// Max relative error of the identity ∂_t b_q = −b_(q+1) over (t, r)
/// samples, with the time derivative from a 4th-order central stencil.
pub fn bq_identity_check(field: &TestFunctionField, samples: &[(f64, f64)]) -> Result<f64> {
    let mut worst = 0.0f64;
    for &(t, r) in samples {
        // near the light cone the kernel varies on the scale t − r + R, not t
        let scale = t.min((t - r + field.r_support).abs().max(1.0));
        let h = 0.02 * scale.max(1.0);
        if t < 2.0 * h {
            return Err(Error::Precondition(format!(
                "sample t = {t} too small for the stencil width {h}"
            )));
        }
        let b = |tt: f64| field.bq(tt, r);
        let db = (-b(t + 2.0 * h)? + 8.0 * b(t + h)? - 8.0 * b(t - h)? + b(t - 2.0 * h)?)
            / (12.0 * h);
        let target = -field.bq_order(field.q + 1.0, t, r)?;
        worst = worst.max((db - target).abs() / target.abs());
    }
    Ok(worst)
}

/// Empirical constants of a kernel bound over a (t, r) grid.
#[derive(Clone, Debug, serde::Serialize)]
pub struct BqBoundReport {
    pub q: f64,
    /// (t, r, measured ratio) samples.
    pub entries: Vec<(f64, f64, f64)>,
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// max_ratio / min_ratio.
    pub spread: f64,
}

fn bq_grid(field: &TestFunctionField) -> Vec<(f64, f64)> {
    let mut pts = Vec::new();
    for i in 0..7 {
        let t = 10.0 * (100.0f64).powf(i as f64 / 6.0); // log-spaced on [10, 10³]
        for frac in [0.0, 0.25, 0.5, 0.75, 0.97] {
            pts.push((t, frac * (t + field.r_support)));
        }
    }
    pts
}

/// Lower-bound constants: ratio b_q(t, r)·(t+R)^q over r ≤ t+R, t ∈ [10, 10³].
pub fn bq_lower_check(field: &TestFunctionField) -> Result<BqBoundReport> {
    let mut entries = Vec::new();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (t, r) in bq_grid(field) {
        let ratio = field.bq(t, r)? * (t + field.r_support).powf(field.q);
        entries.push((t, r, ratio));
        lo = lo.min(ratio);
        hi = hi.max(ratio);
    }
    Ok(BqBoundReport {
        q: field.q,
        entries,
        min_ratio: lo,
        max_ratio: hi,
        spread: hi / lo,
    })
}

/// Upper-bound constants: ratio of b_q to (t+R)^(−q) for q < (n−1)/2, or to
/// the boundary-weighted envelope (t+R)^(−(n−1)/2)(t+R+1−r)^((n−1)/2−q) for
/// q > (n−1)/2. The borderline q = (n−1)/2 is rejected.
pub fn bq_upper_check(field: &TestFunctionField) -> Result<BqBoundReport> {
    let half = (field.family.n - 1) as f64 / 2.0;
    if (field.q - half).abs() < 1e-9 {
        return Err(Error::Precondition(format!(
            "kernel order q = {} coincides with (n-1)/2",
            field.q
        )));
    }
    let r_cap = field.r_support;
    let mut entries = Vec::new();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (t, r) in bq_grid(field) {
        let s = t + r_cap;
        let bound = if field.q < half {
            s.powf(-field.q)
        } else {
            s.powf(-half) * (s + 1.0 - r).powf(half - field.q)
        };
        let ratio = field.bq(t, r)? / bound;
        entries.push((t, r, ratio));
        lo = lo.min(ratio);
        hi = hi.max(ratio);
    }
    Ok(BqBoundReport {
        q: field.q,
        entries,
        min_ratio: lo,
        max_ratio: hi,
        spread: hi / lo,
    })
}

// ---------------------------------------------------------------------------
// exponential-concentration inequality
// ---------------------------------------------------------------------------

/// Ratio diagnostics for ∫₀^(t+R)(1+r)^α ln^γ(1+r) e^(−β(t−r)) dr against
/// (t+R)^α ln^γ(t+R).
#[derive(Clone, Debug, serde::Serialize)]
pub struct KeyInequalityReport {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub r_cap: f64,
    /// (t, ratio) samples.
    pub ratios: Vec<(f64, f64)>,
    pub max_ratio: f64,
    /// max/min over the trailing third of the t grid.
    pub tail_spread: f64,
    /// True when the ratio has leveled off: trailing spread ≤ 1.1 and the
    /// global maximum within 1.5× of the trailing mean.
    pub plateau: bool,
}

/// Verify that the exponentially weighted integral concentrates at the
/// moving boundary: the ratio to (t+R)^α ln^γ(t+R) must stay bounded in t.
pub fn key_inequality_check(
    alpha: f64,
    beta: f64,
    gamma: f64,
    r_cap: f64,
    t_grid: &[f64],
) -> Result<KeyInequalityReport> {
    if !(beta > 0.0) {
        return Err(Error::Precondition("concentration rate beta must be positive".into()));
    }
    if !(r_cap > 0.0) {
        return Err(Error::Precondition("offset R must be positive".into()));
    }
    if t_grid.len() < 6 || t_grid.iter().any(|&t| t <= 2.0) {
        return Err(Error::Precondition(
            "need at least 6 grid times, all above 2".into(),
        ));
    }
    let opts = QuadOpts::with_rtol(1e-9);
    let mut ratios = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let g = |r: f64| {
            let l = (1.0 + r).ln();
            let log_part = if gamma == 0.0 {
                0.0
            } else if l <= 0.0 {
                return if gamma > 0.0 { f64::NEG_INFINITY } else { f64::INFINITY };
            } else {
                gamma * l.ln()
            };
            alpha * l + log_part - beta * (t - r)
        };
        let log_i = log_quad(&g, 0.0, t + r_cap, &opts)?;
        let ls = (t + r_cap).ln();
        let log_bound = alpha * ls + if gamma == 0.0 { 0.0 } else { gamma * ls.ln() };
        ratios.push((t, (log_i - log_bound).exp()));
    }
    let tail_from = t_grid.len() - t_grid.len() / 3;
    let tail = &ratios[tail_from..];
    let tail_lo = tail.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let tail_hi = tail.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let tail_mean = tail.iter().map(|p| p.1).sum::<f64>() / tail.len() as f64;
    let max_ratio = ratios.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let plateau = tail_hi / tail_lo <= 1.1 && max_ratio <= 1.5 * tail_mean;
    Ok(KeyInequalityReport {
        alpha,
        beta,
        gamma,
        r_cap,
        ratios,
        max_ratio,
        tail_spread: tail_hi / tail_lo,
        plateau,
    })
}

// ---------------------------------------------------------------------------
// F₀ / F₁ growth functionals
// ---------------------------------------------------------------------------

/// Fitted T-growth of a functional over a horizon grid.
#[derive(Clone, Debug, serde::Serialize)]
pub struct SlopeReport {
    pub t_values: Vec<f64>,
    /// ln of the functional at each horizon.
    pub log_values: Vec<f64>,
    /// Fitted d ln F / d ln T over the last decade.
    pub slope: f64,
    /// Fitted power of ln T (0 when no log factor is detected).
    pub log_power: f64,
    pub log_flag: bool,
    pub fit_rms: f64,
}

fn fit_tail_slope(t_values: &[f64], log_values: &[f64]) -> Result<SlopeFit> {
    let t_hi = *t_values.last().unwrap();
    let cut = t_hi / 10.0 * (1.0 - 1e-12);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&t, &y) in t_values.iter().zip(log_values) {
        if t >= cut {
            xs.push(t.ln());
            ys.push(y);
        }
    }
    slope_with_log_factor(&xs, &ys)
}

/// ln F₀(T) where
/// F₀ = ∫_(T/2)^T ∫_(B(t+R)) (T^(−2) + D(r) T^(−1))^(p') φ₀ dx dt,
/// reduced to a single radial integral: the time integration contributes
/// the factor (T − max(T/2, r−R)).
pub fn f0_single(
    profile: &CoefficientProfile,
    phi0: &RadialFunction,
    p: f64,
    t_horizon: f64,
    rtol: f64,
) -> Result<f64> {
    let pp = p / (p - 1.0);
    let n = profile.n as f64;
    let r_cap = profile.radius;
    if phi0.r_max() < t_horizon + r_cap {
        return Err(Error::Precondition(format!(
            "phi0 grid reaches {}, need {}",
            phi0.r_max(),
            t_horizon + r_cap
        )));
    }
    let g = |r: f64| {
        if r <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let coeff = 1.0 / (t_horizon * t_horizon) + profile.damping_at(r) / t_horizon;
        let span = t_horizon - (0.5 * t_horizon).max(r - r_cap);
        if span <= 0.0 {
            return f64::NEG_INFINITY;
        }
        pp * coeff.ln() + phi0.log_at(r) + (n - 1.0) * r.ln() + span.ln()
    };
    // the damping feature near the origin has width O(1) in a domain of
    // width T + R, so the integration is split by decades
    let v = log_quad_decades(&g, 1.0, t_horizon + r_cap, &QuadOpts::with_rtol(rtol))?;
    Ok(v + sphere_area(profile.n).ln())
}

/// F₀ growth over a horizon grid: fits ln F₀ against ln T (last decade) and
/// flags a residual ln-T factor. Fails when p ≤ p2, where the local damping
/// singularity makes F₀ divergent.
pub fn f0_estimate(
    profile: &CoefficientProfile,
    phi0: &RadialFunction,
    p: f64,
    t_grid: &[f64],
) -> Result<SlopeReport> {
    let e = crate::exponents::thresholds(profile)?;
    if p <= e.p2 {
        return Err(Error::Divergent(format!(
            "F0 diverges at the origin for p = {p} <= p2 = {}",
            e.p2
        )));
    }
    if t_grid.len() < 8 {
        return Err(Error::Precondition("need at least 8 horizons".into()));
    }
    let mut logs = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        logs.push(f0_single(profile, phi0, p, t, 1e-9)?);
    }
    let fit = fit_tail_slope(t_grid, &logs)?;
    Ok(SlopeReport {
        t_values: t_grid.to_vec(),
        log_values: logs,
        slope: fit.slope,
        log_power: if fit.log_flag { fit.log_power } else { 0.0 },
        log_flag: fit.log_flag,
        fit_rms: if fit.log_flag { fit.rms_log } else { fit.rms_plain },
    })
}

/// ln F₁(T) where
/// F₁ = ∫_(T/2)^T ∫_(B(t+R)) (2 + D)^(p') φ₀^(−p'/p) (e^(−t) φ₁)^(p') dx dt;
/// the time integration contributes
/// J(r) = (e^(−p'·max(T/2, r−R)) − e^(−p'T)) / p'.
pub fn f1_single(
    profile: &CoefficientProfile,
    phi0: &RadialFunction,
    phi1: &RadialFunction,
    p: f64,
    t_horizon: f64,
    rtol: f64,
) -> Result<f64> {
    let pp = p / (p - 1.0);
    let n = profile.n as f64;
    let r_cap = profile.radius;
    for (name, f) in [("phi0", phi0), ("phi1", phi1)] {
        if f.r_max() < t_horizon + r_cap {
            return Err(Error::Precondition(format!(
                "{name} grid reaches {}, need {}",
                f.r_max(),
                t_horizon + r_cap
            )));
        }
    }
    let g = |r: f64| {
        if r <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let a = (0.5 * t_horizon).max(r - r_cap);
        // ln of (e^(−p' a) − e^(−p' T))/p', computed without cancellation
        let log_j = -pp * a + (-((-(pp * (t_horizon - a))).exp_m1())).ln() - pp.ln();
        pp * (2.0 + profile.damping_at(r)).ln() - (pp / p) * phi0.log_at(r)
            + pp * phi1.log_at(r)
            + (n - 1.0) * r.ln()
            + log_j
    };
    let v = log_quad_decades(&g, 1.0, t_horizon + r_cap, &QuadOpts::with_rtol(rtol))?;
    Ok(v + sphere_area(profile.n).ln())
}

/// F₁ growth over a horizon grid. Fails when p ≤ p1, where the weighted
/// origin singularity makes F₁ divergent.
pub fn f1_estimate(
    profile: &CoefficientProfile,
    phi0: &RadialFunction,
    phi1: &RadialFunction,
    p: f64,
    t_grid: &[f64],
) -> Result<SlopeReport> {
    let e = crate::exponents::thresholds(profile)?;
    if p <= e.p1 {
        return Err(Error::Divergent(format!(
            "F1 diverges at the origin for p = {p} <= p1 = {}",
            e.p1
        )));
    }
    if t_grid.len() < 8 {
        return Err(Error::Precondition("need at least 8 horizons".into()));
    }
    let mut logs = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        logs.push(f1_single(profile, phi0, phi1, p, t, 1e-9)?);
    }
    let fit = fit_tail_slope(t_grid, &logs)?;
    Ok(SlopeReport {
        t_values: t_grid.to_vec(),
        log_values: logs,
        slope: fit.slope,
        log_power: if fit.log_flag { fit.log_power } else { 0.0 },
        log_flag: fit.log_flag,
        fit_rms: if fit.log_flag { fit.rms_log } else { fit.rms_plain },
    })
}

/// Theoretical F₁ growth exponent −ρ(v_∞)/(p−1) − p(n−1−d_∞)/(2(p−1)) + n.
pub fn f1_theory_slope(profile: &CoefficientProfile, p: f64) -> Result<f64> {
    let rho_inf = crate::exponents::rho(profile.v_inf, profile.n)?;
    let n = profile.n as f64;
    Ok(-rho_inf / (p - 1.0) - p * (n - 1.0 - profile.d_inf) / (2.0 * (p - 1.0)) + n)
}

// ---------------------------------------------------------------------------
// data functionals
// ---------------------------------------------------------------------------

/// The two positivity functionals of the Cauchy data.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct DataFunctionals {
    /// C₁ = ∫ (g + D f) dx.
    pub c1: f64,
    /// C₂ = ∫ φ₁ (D f + f + g) dx.
    pub c2: f64,
}

/// Radial quadrature of C₁ and C₂ for data supported in r ≤ support.
pub fn data_functionals(
    profile: &CoefficientProfile,
    f: &crate::profile::RadialFn,
    g: &crate::profile::RadialFn,
    support: f64,
    phi1: &RadialFunction,
) -> Result<DataFunctionals> {
    if !(support > 0.0) {
        return Err(Error::Precondition("support radius must be positive".into()));
    }
    if phi1.lambda != 1.0 {
        return Err(Error::Precondition(
            "C2 needs the λ = 1 mode".into(),
        ));
    }
    let n = profile.n as f64;
    let omega = sphere_area(profile.n);
    let opts = QuadOpts::with_rtol(1e-10);
    let c1 = omega
        * quad(
            &|r| (g.eval(r) + profile.damping_at(r) * f.eval(r)) * r.powf(n - 1.0),
            0.0,
            support,
            &opts,
        )?;
    let c2 = omega
        * quad(
            &|r| {
                phi1.value_at(r)
                    * (profile.damping_at(r) * f.eval(r) + f.eval(r) + g.eval(r))
                    * r.powf(n - 1.0)
            },
            0.0,
            support,
            &opts,
        )?;
    Ok(DataFunctionals { c1, c2 })
}

// ---------------------------------------------------------------------------
// duality residual
// ---------------------------------------------------------------------------

/// Relative defect of the space-time duality identity on a simulated
/// trajectory, with the test function Ψ_λ = η_T^(2p') e^(−λt) φ_λ:
///
/// ```text
///   ∫∫ |u|^p Ψ_λ dx dt + ε ∫ (g + (λ + D) f) φ_λ dx
///     = ∫∫ u (∂²_t(η^(2p')) − (2λ + D) ∂_t(η^(2p'))) e^(−λt) φ_λ dx dt
/// ```
///
/// (for linear runs the |u|^p term is absent). Both sides are evaluated with
/// trapezoidal quadrature on the simulation grid, so the residual measures
/// the solver's truncation error, not quadrature noise.
pub fn duality_residual(
    traj: &Trajectory,
    profile: &CoefficientProfile,
    phi: &RadialFunction,
    p: f64,
    t_horizon: f64,
) -> Result<f64> {
    let lam = phi.lambda;
    let k = 2.0 * p / (p - 1.0);
    let n = profile.n as f64;
    let omega = sphere_area(profile.n);
    if *traj.times.last().unwrap() < t_horizon * (1.0 - 1e-9) {
        return Err(Error::Precondition(format!(
            "trajectory ends at {}, cutoff horizon is {t_horizon}",
            traj.times.last().unwrap()
        )));
    }
    if phi.r_max() < *traj.grid.last().unwrap() {
        return Err(Error::Precondition(
            "the radial mode does not cover the simulation grid".into(),
        ));
    }

    // radial weights: trapezoid with surface measure ω r^(n−1) dr
    let dr = traj.grid[1] - traj.grid[0];
    let rw: Vec<f64> = traj
        .grid
        .iter()
        .enumerate()
        .map(|(j, &r)| {
            let w = if j == 0 || j + 1 == traj.grid.len() { 0.5 } else { 1.0 };
            w * omega * r.powf(n - 1.0) * dr
        })
        .collect();
    let log_phi_grid: Vec<f64> = traj.grid.iter().map(|&r| phi.log_at(r)).collect();

    // data term: ε ∫ (g + (λ + D) f) φ_λ dx
    let mut data_term = 0.0;
    for (j, &r) in traj.grid.iter().enumerate() {
        let fval = traj.f.eval(r);
        let gval = traj.g.eval(r);
        if fval == 0.0 && gval == 0.0 {
            continue;
        }
        data_term += rw[j]
            * (gval + (lam + profile.damping_at(r)) * fval)
            * log_phi_grid[j].exp();
    }
    data_term *= traj.epsilon;

    // time loop: trapezoid over recorded frames
    let mut nonlinear_term = 0.0;
    let mut rhs = 0.0;
    for (i, (&t, frame)) in traj.times.iter().zip(&traj.frames).enumerate() {
        let tw = if i == 0 || i + 1 == traj.times.len() {
            0.5 * traj.frame_dt
        } else {
            traj.frame_dt
        };
        let (e_pow, e1, e2) = eta_pow_derivs(t, t_horizon, k);
        let kernel = e2 - 2.0 * lam * e1;
        // skip frames where every factor vanishes
        if e_pow == 0.0 && kernel == 0.0 && e1 == 0.0 {
            continue;
        }
        let mut row_nl = 0.0;
        let mut row_rhs = 0.0;
        for (j, &u) in frame.iter().enumerate() {
            if u == 0.0 {
                continue;
            }
            let w_phi = rw[j] * (log_phi_grid[j] - lam * t).exp();
            if traj.nonlinear && e_pow != 0.0 {
                row_nl += u.abs().powf(p) * e_pow * w_phi;
            }
            let d = profile.damping_at(traj.grid[j]);
            row_rhs += u * (kernel - d * e1) * w_phi;
        }
        nonlinear_term += tw * row_nl;
        rhs += tw * row_rhs;
    }

    let lhs = data_term + if traj.nonlinear { nonlinear_term } else { 0.0 };
    let scale = lhs.abs().max(rhs.abs()).max(1e-300);
    Ok((lhs - rhs).abs() / scale)
}
