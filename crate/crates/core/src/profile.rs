//! Radial damping/potential coefficient profiles.
//!
//! A profile bundles the evaluators for the damping coefficient D(r) and the
//! potential V(r) of
//!
//! ```text
//!     u_tt - Δu + D(|x|) u_t + V(|x|) u = |u|^p,      x ∈ ℝⁿ,
//! ```
//!
//! together with the declared local and asymptotic indices that the exponent
//! calculus consumes:
//!
//! * `v0`, `d0`: coefficients of the r⁻² part at the origin,
//!   r²V(r) → v0 and r²D(r) → d0 as r → 0;
//! * `theta`: local order of the damping, D(r) = O(r^(θ−2)) with θ ∈ [0, 2]
//!   (θ = 2 means bounded damping, θ = 0 allows an inverse-square part);
//! * `v_inf`, `d_inf`: asymptotic indices, r²V(r) → v_inf and
//!   r·D(r) → d_inf as r → ∞.
//!
//! Structural hypotheses (V ≥ 0, D + V ≥ −1, index consistency) are checked
//! numerically on probe grids by [`CoefficientProfile::validate`].

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Shared radial evaluator, `r ↦ value`.
#[derive(Clone)]
pub struct RadialFn(Arc<dyn Fn(f64) -> f64 + Send + Sync>);

impl RadialFn {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        RadialFn(Arc::new(f))
    }

    /// The zero function.
    pub fn zero() -> Self {
        RadialFn::new(|_| 0.0)
    }

    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        (self.0)(r)
    }
}

impl fmt::Debug for RadialFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("RadialFn(..)")
    }
}

/// Truncated analytic expansion of the coefficients at the origin:
/// r²V(r) = v0 + Σ_{j≥1} v_series[j-1]·r^j and likewise for r²D(r).
///
/// Declaring a series refines the Frobenius seeding of the eigenfunction
/// solver; it is required for a clean n = 2, v0 = 0 start where the
/// logarithmic second solution is only suppressed by the series seed.
#[derive(Clone, Debug, Default)]
pub struct LocalSeries {
    /// Coefficients of r¹, r², ... in r²V(r) − v0.
    pub v_coeffs: Vec<f64>,
    /// Coefficients of r¹, r², ... in r²D(r) − d0.
    pub d_coeffs: Vec<f64>,
}

/// Space-dependent damping/potential pair with declared indices.
#[derive(Clone, Debug)]
pub struct CoefficientProfile {
    /// Space dimension n ≥ 2.
    pub n: u32,
    /// Damping coefficient D(r) ≥ 0.
    pub damping: RadialFn,
    /// Potential V(r) ≥ 0.
    pub potential: RadialFn,
    /// Local index of the potential: r²V(r) → v0.
    pub v0: f64,
    /// Local inverse-square coefficient of the damping: r²D(r) → d0.
    pub d0: f64,
    /// Asymptotic index of the potential: r²V(r) → v_inf.
    pub v_inf: f64,
    /// Asymptotic index of the damping: r·D(r) → d_inf.
    pub d_inf: f64,
    /// Local order of the damping, D = O(r^(θ−2)), θ ∈ [0, 2].
    pub theta: f64,
    /// Scattering-damping envelope D(r) ≤ mu (1+r)^(−beta), when declared.
    pub mu: Option<f64>,
    /// Envelope decay rate; beta > 1 qualifies the profile as scattering.
    pub beta: Option<f64>,
    /// Support radius of the Cauchy data / transition radius of the profile.
    pub radius: f64,
    /// Optional analytic expansion at the origin.
    pub local_series: Option<LocalSeries>,
    /// Tolerance for the numeric index-consistency checks; family builders
    /// widen it when their tails converge slowly.
    pub limit_tol: f64,
    /// Human-readable family tag, used in reports.
    pub label: String,
}

impl CoefficientProfile {
    /// Profile with explicit evaluators and indices; validation is separate.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        n: u32,
        damping: RadialFn,
        potential: RadialFn,
        v0: f64,
        d0: f64,
        v_inf: f64,
        d_inf: f64,
        theta: f64,
        label: impl Into<String>,
    ) -> Self {
        CoefficientProfile {
            n,
            damping,
            potential,
            v0,
            d0,
            v_inf,
            d_inf,
            theta,
            mu: None,
            beta: None,
            radius: 1.0,
            local_series: None,
            limit_tol: 0.05,
            label: label.into(),
        }
    }

    /// No damping, no potential.
    pub fn free(n: u32) -> Self {
        let mut p = CoefficientProfile::new(
            n,
            RadialFn::zero(),
            RadialFn::zero(),
            0.0,
            0.0,
            0.0,
            0.0,
            2.0,
            "free",
        );
        // D ≡ 0 trivially satisfies any scattering envelope.
        p.mu = Some(0.0);
        p.beta = Some(2.0);
        p
    }

    /// Scattering damping D(r) = mu (1+r)^(−beta) with beta > 1, V ≡ 0.
    pub fn scattering(n: u32, mu: f64, beta: f64) -> Self {
        let mut p = CoefficientProfile::new(
            n,
            RadialFn::new(move |r| mu * (1.0 + r).powf(-beta)),
            RadialFn::zero(),
            0.0,
            0.0,
            0.0,
            0.0,
            2.0,
            format!("scattering(mu={mu},beta={beta})"),
        );
        p.mu = Some(mu);
        p.beta = Some(beta);
        // r·D = mu·r/(1+r)^beta decays like r^(1-beta); widen the probe
        // tolerance accordingly so slow tails still validate.
        p.limit_tol = (2.0 * mu * 101f64.powf(1.0 - beta)).max(0.05);
        p
    }

    /// The n = 3 profile with D(r) = 2/r beyond a transition radius r0 and
    /// the exact relation V = −D'/2 + D²/4, mollified quadratically inside:
    /// D(r) = 3/r0 − r²/r0³ for r < r0 (C¹ match, positive, decreasing).
    /// Tail indices: d_inf = 2, v_inf = 2 (V = 2/r² for r ≥ r0).
    pub fn gkw(r0: f64) -> Self {
        assert!(r0 > 0.0, "transition radius must be positive");
        let d = move |r: f64| {
            if r >= r0 {
                2.0 / r
            } else {
                3.0 / r0 - r * r / (r0 * r0 * r0)
            }
        };
        let dprime = move |r: f64| {
            if r >= r0 {
                -2.0 / (r * r)
            } else {
                -2.0 * r / (r0 * r0 * r0)
            }
        };
        let v = move |r: f64| -0.5 * dprime(r) + 0.25 * d(r) * d(r);
        let mut p = CoefficientProfile::new(
            3,
            RadialFn::new(d),
            RadialFn::new(v),
            0.0,
            0.0,
            2.0,
            2.0,
            2.0,
            format!("gkw(r0={r0})"),
        );
        p.radius = r0.max(1.0);
        p
    }

    /// Scale-invariant pair D(r) = d/r, V(r) = v/r².
    ///
    /// The inverse-square part of D vanishes (r²D → 0), so d0 = 0 and the
    /// local order is θ = 1 for d ≠ 0; the 1/r strength reappears as d_inf.
    pub fn scale_invariant(n: u32, d: f64, v: f64) -> Self {
        CoefficientProfile::new(
            n,
            RadialFn::new(move |r| d / r),
            RadialFn::new(move |r| v / (r * r)),
            v,
            0.0,
            v,
            d,
            if d != 0.0 { 1.0 } else { 2.0 },
            format!("scale_invariant(d={d},v={v})"),
        )
    }

    /// Doubly singular demonstration family
    /// D(r) = d0/r² + d_inf/r, V(r) = v0/r² + 2(v_inf − v0)·arctan(r)/(π r²),
    /// exhibiting all four indices at once (θ = 0).
    pub fn singular_demo(n: u32, d0: f64, v0: f64, d_inf: f64, v_inf: f64) -> Self {
        use std::f64::consts::FRAC_2_PI;
        CoefficientProfile::new(
            n,
            RadialFn::new(move |r| d0 / (r * r) + d_inf / r),
            RadialFn::new(move |r| (v0 + FRAC_2_PI * (v_inf - v0) * r.atan()) / (r * r)),
            v0,
            d0,
            v_inf,
            d_inf,
            0.0,
            format!("singular_demo(d0={d0},v0={v0},d_inf={d_inf},v_inf={v_inf})"),
        )
    }

    /// Piecewise-linear table profile: inside the table range D and V are
    /// interpolated linearly; outside they continue with the power laws
    /// implied by the declared indices (d0/θ at the origin, d_inf/v_inf at
    /// infinity, matched to the boundary samples).
    pub fn table(
        n: u32,
        points: Vec<(f64, f64, f64)>,
        v0: f64,
        d0: f64,
        v_inf: f64,
        d_inf: f64,
        theta: f64,
    ) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidProfile(
                "table profile needs at least two breakpoints".into(),
            ));
        }
        if points.windows(2).any(|w| w[1].0 <= w[0].0) || points[0].0 <= 0.0 {
            return Err(Error::InvalidProfile(
                "table radii must be positive and strictly increasing".into(),
            ));
        }
        let pts = Arc::new(points);
        let interp = |pts: &[(f64, f64, f64)], r: f64, col: fn(&(f64, f64, f64)) -> f64| {
            let i = pts.partition_point(|p| p.0 < r).clamp(1, pts.len() - 1);
            let (a, b) = (&pts[i - 1], &pts[i]);
            let t = (r - a.0) / (b.0 - a.0);
            col(a) * (1.0 - t) + col(b) * t
        };
        let (r_lo, d_lo, v_lo) = *pts.first().unwrap();
        let (r_hi, d_hi, v_hi) = *pts.last().unwrap();
        let pd = pts.clone();
        let damping = RadialFn::new(move |r| {
            if r < r_lo {
                // continue with the declared local order r^(θ-2)
                d_lo * (r / r_lo).powf(theta - 2.0)
            } else if r > r_hi {
                d_hi * r_hi / r
            } else {
                interp(&pd, r, |p| p.1)
            }
        });
        let pv = pts.clone();
        let potential = RadialFn::new(move |r| {
            if r < r_lo {
                if v0 != 0.0 {
                    v0 / (r * r)
                } else {
                    v_lo
                }
            } else if r > r_hi {
                v_hi * (r_hi / r) * (r_hi / r)
            } else {
                interp(&pv, r, |p| p.2)
            }
        });
        let prof = CoefficientProfile::new(
            n,
            damping,
            potential,
            v0,
            d0,
            v_inf,
            d_inf,
            theta,
            "table",
        );
        // The power-law continuations must be consistent with the declared
        // asymptotic indices at the table boundary.
        if (r_hi * d_hi - d_inf).abs() > prof.limit_tol.max(0.05) * d_inf.abs().max(1.0) {
            return Err(Error::InvalidProfile(format!(
                "table tail r·D = {} at r = {r_hi} is inconsistent with d_inf = {d_inf}",
                r_hi * d_hi
            )));
        }
        if (r_hi * r_hi * v_hi - v_inf).abs() > prof.limit_tol.max(0.05) * v_inf.abs().max(1.0) {
            return Err(Error::InvalidProfile(format!(
                "table tail r²V = {} at r = {r_hi} is inconsistent with v_inf = {v_inf}",
                r_hi * r_hi * v_hi
            )));
        }
        Ok(prof)
    }

    /// D(r) evaluated at radius `r`.
    #[inline]
    pub fn damping_at(&self, r: f64) -> f64 {
        self.damping.eval(r)
    }

    /// V(r) evaluated at radius `r`.
    #[inline]
    pub fn potential_at(&self, r: f64) -> f64 {
        self.potential.eval(r)
    }

    /// True when the profile declares a scattering envelope with beta > 1.
    pub fn is_scattering(&self) -> bool {
        matches!(self.beta, Some(b) if b > 1.0) && self.mu.is_some()
    }

    /// Numeric consistency check of the declared structure:
    /// * V ≥ 0 and D + V ≥ −1 on a log-spaced probe grid,
    /// * r²V → v0 (and r²D → d0 when θ < 2) on an origin probe grid,
    /// * r²V → v_inf and r·D → d_inf at r ∈ {10², 10³, 10⁴},
    /// * θ ∈ [0, 2], n ≥ 2, and the index floor for rho stays respected.
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidProfile(format!(
                "dimension n = {} out of range (need n >= 2)",
                self.n
            )));
        }
        if !(0.0..=2.0).contains(&self.theta) {
            return Err(Error::InvalidProfile(format!(
                "theta = {} out of range [0, 2]",
                self.theta
            )));
        }
        if self.radius <= 0.0 {
            return Err(Error::InvalidProfile("radius must be positive".into()));
        }
        let floor = -0.25 * ((self.n as f64) - 2.0).powi(2);
        for (name, v) in [
            ("v0", self.v0),
            ("v0+d0", self.v0 + self.d0),
            ("v_inf", self.v_inf),
        ] {
            if v < floor {
                return Err(Error::InvalidProfile(format!(
                    "index {name} = {v} below the critical floor {floor}"
                )));
            }
        }

        // Sign conditions on a wide probe grid.
        for &r in &log_grid(1e-4, 1e4, 201) {
            let d = self.damping_at(r);
            let v = self.potential_at(r);
            if !d.is_finite() || !v.is_finite() {
                return Err(Error::InvalidProfile(format!(
                    "non-finite coefficient at r = {r}"
                )));
            }
            if v < -1e-12 {
                return Err(Error::InvalidProfile(format!(
                    "V({r}) = {v} is negative"
                )));
            }
            if d + v < -1.0 - 1e-12 {
                return Err(Error::InvalidProfile(format!(
                    "D + V = {} < -1 at r = {r}",
                    d + v
                )));
            }
        }

        // Local indices.
        let tol0 = self.limit_tol;
        for &r in &[1e-2, 1e-3, 1e-4] {
            let rv = r * r * self.potential_at(r);
            if (rv - self.v0).abs() > tol0 * self.v0.abs().max(1.0) {
                return Err(Error::InvalidProfile(format!(
                    "r²V = {rv} at r = {r} is inconsistent with v0 = {}",
                    self.v0
                )));
            }
            if self.theta < 2.0 {
                let rd = r * r * self.damping_at(r);
                if (rd - self.d0).abs() > tol0 * self.d0.abs().max(1.0) {
                    return Err(Error::InvalidProfile(format!(
                        "r²D = {rd} at r = {r} is inconsistent with d0 = {}",
                        self.d0
                    )));
                }
            }
        }

        // Asymptotic indices.
        for &r in &[1e2, 1e3, 1e4] {
            let rv = r * r * self.potential_at(r);
            if (rv - self.v_inf).abs() > self.limit_tol * self.v_inf.abs().max(1.0) {
                return Err(Error::InvalidProfile(format!(
                    "r²V = {rv} at r = {r} is inconsistent with v_inf = {}",
                    self.v_inf
                )));
            }
            let rd = r * self.damping_at(r);
            if (rd - self.d_inf).abs() > self.limit_tol * self.d_inf.abs().max(1.0) {
                return Err(Error::InvalidProfile(format!(
                    "r·D = {rd} at r = {r} is inconsistent with d_inf = {}",
                    self.d_inf
                )));
            }
        }

        // A declared scattering envelope must actually dominate D.
        if let (Some(mu), Some(beta)) = (self.mu, self.beta) {
            for &r in &log_grid(1e-3, 1e3, 61) {
                let d = self.damping_at(r);
                if d < -1e-12 || d > mu * (1.0 + r).powf(-beta) + 1e-12 * mu.max(1.0) {
                    return Err(Error::InvalidProfile(format!(
                        "D({r}) = {d} escapes the declared envelope mu(1+r)^-beta"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Strictly increasing log-spaced grid with `count` points on [lo, hi].
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && count >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Descriptor of a built-in profile family, for catalogs and config parsing.
#[derive(Clone, Debug, serde::Serialize)]
pub struct FamilyInfo {
    pub name: &'static str,
    pub parameters: &'static [&'static str],
    pub summary: &'static str,
}

/// Catalog of the built-in coefficient families.
pub fn builtin_families() -> Vec<FamilyInfo> {
    vec![
        FamilyInfo {
            name: "free",
            parameters: &["n"],
            summary: "D = V = 0",
        },
        FamilyInfo {
            name: "scattering",
            parameters: &["n", "mu", "beta"],
            summary: "D = mu(1+r)^-beta with beta > 1, V = 0",
        },
        FamilyInfo {
            name: "gkw",
            parameters: &["r0"],
            summary: "n = 3, D = 2/r beyond r0 (mollified inside), V = -D'/2 + D^2/4",
        },
        FamilyInfo {
            name: "scale_invariant",
            parameters: &["n", "d", "v"],
            summary: "D = d/r, V = v/r^2",
        },
        FamilyInfo {
            name: "singular_demo",
            parameters: &["n", "d0", "v0", "d_inf", "v_inf"],
            summary: "D = d0/r^2 + d_inf/r, V with r^-2 local and asymptotic parts",
        },
        FamilyInfo {
            name: "table",
            parameters: &["n", "points", "v0", "d0", "v_inf", "d_inf", "theta"],
            summary: "piecewise-linear samples with power-law continuations",
        },
    ]
}
