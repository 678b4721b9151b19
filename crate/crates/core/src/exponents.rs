//! Critical exponents and threshold calculus.
//!
//! All quantities live on the extended real line: a non-positive denominator
//! or an out-of-range branch yields `f64::INFINITY`, which composes correctly
//! through `max`/`min` and comparisons.
//!
//! Core objects:
//!
//! * `rho(v, n)`: the index shift induced by an inverse-square potential
//!   v/r², i.e. the positive root of ρ(ρ + n − 2) = v. An eigenfunction that
//!   behaves like a constant for v = 0 behaves like r^ρ(v) instead.
//! * `glassey(m) = 1 + 2/(m−1)`: the wave-type threshold seen by derivative
//!   (energy flux) obstructions in effective dimension m.
//! * `strauss(m)`: the positive root of `gamma(p, m) = 0` where
//!   `gamma(p, m) = 2 + (m+1)p − (m−1)p²`; the classical small-data threshold
//!   in effective dimension m.
//! * [`thresholds`]: the full threshold set (p0…p5, shifted Strauss/Glassey
//!   exponents and the critical power p_c) of a coefficient profile, where
//!   damping shifts the effective dimension by d_inf and the potential shifts
//!   it by ρ(v_inf).

use crate::error::{Error, Result};
use crate::profile::CoefficientProfile;

/// Positive root of ρ(ρ + n − 2) = v:
/// ρ(v) = sqrt(((n−2)/2)² + v) − (n−2)/2.
///
/// Defined for v ≥ −((n−2)/2)²; below that floor the roots are complex.
pub fn rho(v: f64, n: u32) -> Result<f64> {
    let half = 0.5 * (n as f64 - 2.0);
    let disc = half * half + v;
    if disc < 0.0 {
        return Err(Error::RhoDomain {
            v,
            floor: -half * half,
            n,
        });
    }
    Ok(disc.sqrt() - half)
}

/// Glassey-type exponent p_G(m) = 1 + 2/(m−1), +∞ for m ≤ 1.
pub fn glassey(m: f64) -> f64 {
    if m > 1.0 {
        1.0 + 2.0 / (m - 1.0)
    } else {
        f64::INFINITY
    }
}

/// Strauss-type exponent p_S(m): the positive root of gamma(p, m) = 0,
/// p_S(m) = (m + 1 + sqrt(m² + 10m − 7)) / (2(m−1)); +∞ for m ≤ 1.
pub fn strauss(m: f64) -> f64 {
    if m > 1.0 {
        (m + 1.0 + (m * m + 10.0 * m - 7.0).sqrt()) / (2.0 * (m - 1.0))
    } else {
        f64::INFINITY
    }
}

/// gamma(p, m) = 2 + (m+1)p − (m−1)p², the Strauss quadratic in effective
/// dimension m (real-valued to allow shifted dimensions like n + d_inf).
pub fn gamma(p: f64, m: f64) -> f64 {
    2.0 + (m + 1.0) * p - (m - 1.0) * p * p
}

/// gamma0(p, n) = −(n−1)p(p−1) + 2np − 2n + 2: the sub-"n/(n−1)" branch
/// quadratic of the scattering-damping lifespan table.
pub fn gamma0(p: f64, n: f64) -> f64 {
    -(n - 1.0) * p * (p - 1.0) + 2.0 * n * (p - 1.0) + 2.0
}

/// gamma1(p, n, d_inf): as `gamma0` but with the damping-shifted leading
/// coefficient n + d_inf − 1.
pub fn gamma1(p: f64, n: f64, d_inf: f64) -> f64 {
    -(n + d_inf - 1.0) * p * (p - 1.0) + 2.0 * n * (p - 1.0) + 2.0
}

/// gamma2(p) = 2(n + ρ(v_inf) − 1)(p − p3) + gamma(p, n + d_inf): the mixed
/// quadratic controlling the combined-functional branch of the general
/// lifespan table. `p3` is the potential-shifted knee (n+ρ)/(n+ρ−1).
pub fn gamma2(p: f64, n: u32, d_inf: f64, v_inf: f64) -> Result<f64> {
    let shift = rho(v_inf, n)?;
    let m = n as f64 + shift;
    let p3 = m / (m - 1.0);
    Ok(2.0 * (m - 1.0) * (p - p3) + gamma(p, n as f64 + d_inf))
}

/// Selector for the four lifespan quadratics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaKind {
    Plain,
    G0,
    G1,
    G2,
}

/// Enum-dispatched evaluation of the four quadratics. `Plain` and `G0` ignore
/// the trailing indices; `G1` uses d_inf; `G2` uses both.
pub fn gamma_quad(kind: GammaKind, p: f64, n: u32, d_inf: f64, v_inf: f64) -> Result<f64> {
    match kind {
        GammaKind::Plain => Ok(gamma(p, n as f64)),
        GammaKind::G0 => Ok(gamma0(p, n as f64)),
        GammaKind::G1 => Ok(gamma1(p, n as f64, d_inf)),
        GammaKind::G2 => gamma2(p, n, d_inf, v_inf),
    }
}

/// The derived threshold set of a profile. All fields are extended reals.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct ExponentSet {
    /// ρ(v0): local index shift seen by the λ = 0 eigenfunction.
    pub rho_v0: f64,
    /// ρ(v0 + d0): local index shift seen by the λ = 1 eigenfunction.
    pub rho_v0_d0: f64,
    /// ρ(v_inf): asymptotic index shift.
    pub rho_v_inf: f64,
    /// p1 = (n + ρ(v0)) / (n + ρ(v0+d0) + θ − 2).
    pub p1: f64,
    /// p2 = (n + ρ(v0)) / (n + ρ(v0) + θ − 2).
    pub p2: f64,
    /// p0 = max(p1, p2): entry point of the combined-functional branch.
    pub p0: f64,
    /// p3 = (n + ρ(v_inf)) / (n + ρ(v_inf) − 1): the potential-shifted knee.
    pub p3: f64,
    /// p4 = (n + ρ(v0+d0)) / (n + ρ(v0+d0) + θ − 2).
    pub p4: f64,
    /// p5: positive root of gamma2, +∞ when n + d_inf ≤ 1.
    pub p5: f64,
    /// Strauss exponent in the damping-shifted dimension, p_S(n + d_inf).
    pub ps_shift: f64,
    /// Glassey exponent in the potential-shifted dimension, p_G(n + ρ(v_inf)).
    pub pg_shift: f64,
    /// Critical power p_c = max(ps_shift, pg_shift).
    pub p_c: f64,
}

/// Ratio (n + a) / (n + b + θ − 2) on the extended real line: +∞ when the
/// denominator is not positive.
fn threshold_ratio(n: f64, a: f64, b: f64, theta: f64) -> f64 {
    let den = n + b + theta - 2.0;
    if den > 0.0 {
        (n + a) / den
    } else {
        f64::INFINITY
    }
}

/// Compute the threshold set of a validated profile.
pub fn thresholds(profile: &CoefficientProfile) -> Result<ExponentSet> {
    let n = profile.n as f64;
    let rho_v0 = rho(profile.v0, profile.n)?;
    let rho_v0_d0 = rho(profile.v0 + profile.d0, profile.n)?;
    let rho_v_inf = rho(profile.v_inf, profile.n)?;
    let theta = profile.theta;
    let d_inf = profile.d_inf;

    let p1 = threshold_ratio(n, rho_v0, rho_v0_d0, theta);
    let p2 = threshold_ratio(n, rho_v0, rho_v0, theta);
    let p0 = p1.max(p2);
    // n + ρ(v_inf) − 1 ≥ 1 for n ≥ 2 and ρ ≥ 0, but indices may be negative
    // down to the rho floor; guard the denominator anyway.
    let m_pot = n + rho_v_inf;
    let p3 = if m_pot > 1.0 {
        m_pot / (m_pot - 1.0)
    } else {
        f64::INFINITY
    };
    let p4 = threshold_ratio(n, rho_v0_d0, rho_v0_d0, theta);

    let m_damp = n + d_inf;
    let p5 = if m_damp > 1.0 {
        let s = 3.0 * n + d_inf + 2.0 * rho_v_inf - 1.0;
        let disc = s * s - 8.0 * (m_damp - 1.0) * (m_pot - 1.0);
        let root = (s + disc.sqrt()) / (2.0 * (m_damp - 1.0));
        // Guard against transcription drift: the closed form must be a root
        // of gamma2 (scaled check; gamma2 has O(n²) coefficients).
        debug_assert!(
            gamma2(root, profile.n, d_inf, profile.v_inf)?.abs()
                < 1e-10 * (1.0 + root * root * (m_damp + 1.0)),
            "closed-form p5 is not a gamma2 root"
        );
        root
    } else {
        f64::INFINITY
    };

    let ps_shift = strauss(m_damp);
    let pg_shift = glassey(m_pot);
    Ok(ExponentSet {
        rho_v0,
        rho_v0_d0,
        rho_v_inf,
        p1,
        p2,
        p0,
        p3,
        p4,
        p5,
        ps_shift,
        pg_shift,
        p_c: ps_shift.max(pg_shift),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rho_known_values() {
        // no potential, any n: no shift
        assert_eq!(rho(0.0, 5).unwrap(), 0.0);
        // n = 3, v = 2: sqrt(1/4 + 2) - 1/2 = 1 exactly
        assert_eq!(rho(2.0, 3).unwrap(), 1.0);
        // n = 2: rho(v) = sqrt(v)
        assert_relative_eq!(rho(0.25, 2).unwrap(), 0.5, max_relative = 1e-15);
    }

    #[test]
    fn rho_domain_floor() {
        // floor is -((n-2)/2)^2 = -1/4 for n = 3
        assert!(rho(-0.25, 3).is_ok());
        assert!(matches!(
            rho(-0.2500001, 3),
            Err(Error::RhoDomain { .. })
        ));
    }

    #[test]
    fn rho_defining_identity() {
        for &(v, n) in &[(0.5, 2u32), (3.0, 3), (7.5, 4), (0.01, 6), (-0.2, 3)] {
            let r = rho(v, n).unwrap();
            assert_relative_eq!(r * (r + n as f64 - 2.0), v, epsilon = 1e-12);
        }
    }

    #[test]
    fn glassey_known_values() {
        assert_eq!(glassey(3.0), 2.0);
        assert_relative_eq!(glassey(4.0), 5.0 / 3.0, max_relative = 1e-15);
        assert_eq!(glassey(1.0), f64::INFINITY);
        assert_eq!(glassey(0.5), f64::INFINITY);
    }

    #[test]
    fn strauss_known_values() {
        assert_relative_eq!(strauss(3.0), 1.0 + 2f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(
            strauss(5.0),
            (3.0 + 17f64.sqrt()) / 4.0,
            max_relative = 1e-15
        );
        assert_eq!(strauss(1.0), f64::INFINITY);
    }

    #[test]
    fn strauss_is_gamma_root_and_beats_glassey() {
        for k in 1..=100 {
            let m = 1.0 + 49.0 * k as f64 / 100.0;
            let ps = strauss(m);
            assert!(
                gamma(ps, m).abs() < 1e-9,
                "gamma(p_S({m}), {m}) = {}",
                gamma(ps, m)
            );
            // p_G is the smaller obstruction exponent for every m > 1
            assert!(glassey(m) < ps);
        }
    }

    #[test]
    fn glassey_cancels_gamma_to_two() {
        for k in 1..=100 {
            let m = 1.0 + 49.0 * k as f64 / 100.0;
            let pg = glassey(m);
            assert!(
                (gamma(pg, m) - 2.0).abs() < 1e-12,
                "gamma(p_G({m}), {m}) = {}",
                gamma(pg, m)
            );
        }
    }

    #[test]
    fn gamma_known_value() {
        assert_eq!(gamma(2.0, 3.0), 2.0);
        // gamma1 with d_inf = 0 coincides with gamma0
        for &p in &[1.1, 1.5, 2.0, 2.4] {
            assert_eq!(gamma0(p, 3.0), gamma1(p, 3.0, 0.0));
        }
    }

    #[test]
    fn gamma0_matches_gamma_at_the_knee() {
        // the two scattering branches agree exactly at p = n/(n-1)
        for n in [2.0f64, 3.0, 4.0, 5.0] {
            let p = n / (n - 1.0);
            assert_relative_eq!(gamma0(p, n), gamma(p, n), epsilon = 1e-12);
        }
    }

    #[test]
    fn gamma2_reduces_to_gamma_at_p3() {
        let prof = CoefficientProfile::gkw(1.0);
        let e = thresholds(&prof).unwrap();
        let g2 = gamma2(e.p3, 3, 2.0, 2.0).unwrap();
        assert_relative_eq!(g2, gamma(e.p3, 5.0), epsilon = 1e-12);
    }

    #[test]
    fn thresholds_gkw_exact() {
        let prof = CoefficientProfile::gkw(1.0);
        let e = thresholds(&prof).unwrap();
        assert_eq!(e.p1, 1.0);
        assert_eq!(e.p2, 1.0);
        assert_eq!(e.p0, 1.0);
        assert_eq!(e.p3, 4.0 / 3.0);
        assert_eq!(e.p4, 1.0);
        assert!((e.p_c - (3.0 + 17f64.sqrt()) / 4.0).abs() <= 1e-12);
        assert_eq!(e.p_c, e.ps_shift);
        assert_relative_eq!(e.pg_shift, 5.0 / 3.0, max_relative = 1e-15);
    }

    #[test]
    fn thresholds_free_profile() {
        let e = thresholds(&CoefficientProfile::free(3)).unwrap();
        assert_eq!(e.p1, 1.0);
        assert_eq!(e.p2, 1.0);
        assert_relative_eq!(e.p3, 1.5, max_relative = 1e-15);
        assert_relative_eq!(e.p_c, 1.0 + 2f64.sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn non_positive_denominators_give_infinity() {
        // n = 2, theta = 0, v0 = 0: denominator n + rho + theta - 2 = 0
        let prof = CoefficientProfile::singular_demo(2, 0.5, 0.0, 1.0, 1.0);
        let e = thresholds(&prof).unwrap();
        assert_eq!(e.p2, f64::INFINITY);
        assert!(e.p0.is_infinite());
        // p1 has a positive denominator through rho(v0+d0) > 0
        assert!(e.p1.is_finite());
    }

    #[test]
    fn p5_infinite_in_low_effective_dimension() {
        // n + d_inf <= 1 kills the gamma2 quadratic's leading coefficient
        let mut prof = CoefficientProfile::free(2);
        prof.d_inf = -1.0;
        let e = thresholds(&prof).unwrap();
        assert_eq!(e.p5, f64::INFINITY);
        assert_eq!(e.ps_shift, f64::INFINITY);
    }

    #[test]
    fn p5_is_gamma2_root() {
        for prof in [
            CoefficientProfile::gkw(1.0),
            CoefficientProfile::scale_invariant(3, 2.0, 1.0),
            CoefficientProfile::singular_demo(4, 0.5, 1.0, 2.0, 3.0),
        ] {
            let e = thresholds(&prof).unwrap();
            let g = gamma2(e.p5, prof.n, prof.d_inf, prof.v_inf).unwrap();
            assert!(g.abs() < 1e-9, "gamma2(p5) = {g} for {}", prof.label);
        }
    }

    #[test]
    fn strauss_shift_infinite_for_strongly_negative_damping() {
        assert_eq!(strauss(2.0 + (-1.0)), f64::INFINITY);
    }
}
