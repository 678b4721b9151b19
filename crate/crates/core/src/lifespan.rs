//! Lifespan upper-bound classification.
//!
//! Each blow-up theorem comes with a table of lifespan upper bounds
//! T_ε ≤ C·ε^(−a)·(ln ε⁻¹)^b (or exp(C ε^(−a)) at a critical power), with
//! table rows selected by where p sits relative to the profile's thresholds.
//! [`classify`] evaluates every row whose condition holds and returns the
//! asymptotically smallest bound as ε → 0, breaking ties by the lowest row
//! index. Row conditions stated as equalities (e.g. p = p3) are matched
//! within a 1e−12 relative window.

use crate::error::{Error, Result};
use crate::exponents::{gamma, gamma0, gamma1, gamma2, thresholds, ExponentSet};
use crate::profile::CoefficientProfile;

/// Functional form of a lifespan upper bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundForm {
    /// T ≤ C ε^(−a).
    Power,
    /// T ≤ C ε^(−a) (ln ε⁻¹)^b.
    PowerLog,
    /// T ≤ exp(C ε^(−a)).
    Exponential,
    /// No upper bound is claimed for this (theorem, p).
    None,
}

/// A classified lifespan upper bound.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct LifespanBound {
    pub form: BoundForm,
    /// Power of ε⁻¹ (the exponential-argument power for `Exponential`).
    pub a: f64,
    /// Power of ln ε⁻¹ (0 unless `PowerLog`).
    pub b: f64,
    /// Stable identifier of the selected table row.
    pub case_id: &'static str,
}

impl LifespanBound {
    fn none(case_id: &'static str) -> Self {
        LifespanBound {
            form: BoundForm::None,
            a: 0.0,
            b: 0.0,
            case_id,
        }
    }

    /// Ordering key by asymptotic size as ε → 0: any power bound is smaller
    /// than an exponential one, which is smaller than no bound; among power
    /// bounds, compare (a, b) lexicographically.
    fn size_key(&self) -> (u8, f64, f64) {
        match self.form {
            BoundForm::Power | BoundForm::PowerLog => (0, self.a, self.b),
            BoundForm::Exponential => (1, self.a, 0.0),
            BoundForm::None => (2, 0.0, 0.0),
        }
    }
}

/// The blow-up theorem whose lifespan table is consulted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    /// Scattering damping 0 ≤ D ≤ mu(1+r)^(−beta), beta > 1, V ≡ 0.
    Scattering,
    /// Critical damping r·D ∈ L^∞ with short-range potential (v_inf = 0).
    ShortRange,
    /// General profile with local/asymptotic indices.
    General,
    /// Compactly supported damping on top of the general hypotheses.
    VanishingDamping,
}

fn approx_eq(p: f64, q: f64) -> bool {
    (p - q).abs() <= 1e-12 * p.abs().max(q.abs()).max(1.0)
}

fn power(a: f64, case_id: &'static str) -> LifespanBound {
    LifespanBound {
        form: BoundForm::Power,
        a,
        b: 0.0,
        case_id,
    }
}

fn power_log(a: f64, b: f64, case_id: &'static str) -> LifespanBound {
    // a zero log power degenerates to a pure power bound
    if b == 0.0 {
        power(a, case_id)
    } else {
        LifespanBound {
            form: BoundForm::PowerLog,
            a,
            b,
            case_id,
        }
    }
}

/// Smallest bound among matching rows; earlier rows win ties.
fn best(rows: Vec<LifespanBound>, in_range: bool) -> LifespanBound {
    rows.into_iter()
        .min_by(|x, y| x.size_key().partial_cmp(&y.size_key()).unwrap())
        .unwrap_or_else(|| {
            LifespanBound::none(if in_range {
                "no-rate-claimed"
            } else {
                "no-blow-up-claimed"
            })
        })
}

fn probe_identically_zero(f: &crate::profile::RadialFn, radii: &[f64]) -> bool {
    radii.iter().all(|&r| f.eval(r).abs() < 1e-14)
}

/// Classify the lifespan bound claimed by `theorem` for the profile at
/// power `p`.
///
/// Returns `form = None` with case id `no-blow-up-claimed` when p lies
/// outside the theorem's blow-up range, and `no-rate-claimed` when blow-up
/// is claimed but no table row attaches a rate.
pub fn classify(theorem: Theorem, profile: &CoefficientProfile, p: f64) -> Result<LifespanBound> {
    if !(p > 1.0) {
        return Err(Error::Precondition(format!(
            "classification needs p > 1, got p = {p}"
        )));
    }
    let e = thresholds(profile)?;
    match theorem {
        Theorem::Scattering => classify_scattering(profile, p),
        Theorem::ShortRange => classify_short_range(profile, p, &e),
        Theorem::General => classify_general(profile, p, &e),
        Theorem::VanishingDamping => classify_vanishing(profile, p, &e),
    }
}

fn classify_scattering(profile: &CoefficientProfile, p: f64) -> Result<LifespanBound> {
    if !profile.is_scattering() {
        return Err(Error::Precondition(
            "scattering classification needs a declared envelope D <= mu(1+r)^-beta with beta > 1"
                .into(),
        ));
    }
    if profile.v0 != 0.0
        || profile.v_inf != 0.0
        || !probe_identically_zero(&profile.potential, &[0.5, 5.0, 50.0])
    {
        return Err(Error::Precondition(
            "scattering classification needs V = 0".into(),
        ));
    }
    let n = profile.n as f64;
    let knee = n / (n - 1.0);
    let ps = crate::exponents::strauss(n);
    let mut rows = Vec::new();
    if p <= knee || approx_eq(p, knee) {
        rows.push(power(2.0 * p * (p - 1.0) / gamma0(p, n), "scattering-1"));
    }
    if (p >= knee || approx_eq(p, knee)) && p < ps && !approx_eq(p, ps) {
        rows.push(power(2.0 * p * (p - 1.0) / gamma(p, n), "scattering-2"));
    }
    if approx_eq(p, ps) {
        rows.push(LifespanBound {
            form: BoundForm::Exponential,
            a: p * (p - 1.0),
            b: 0.0,
            case_id: "scattering-3",
        });
    }
    Ok(best(rows, p < ps))
}

fn classify_short_range(
    profile: &CoefficientProfile,
    p: f64,
    e: &ExponentSet,
) -> Result<LifespanBound> {
    if profile.v_inf != 0.0 {
        return Err(Error::Precondition(
            "short-range classification needs v_inf = 0".into(),
        ));
    }
    let n = profile.n as f64;
    let d = profile.d_inf;
    let knee = n / (n - 1.0);
    let pg = crate::exponents::glassey(n);
    // d_inf conditions of the two column blocks
    let high = d > (n - 1.0) * (2.0 / p - 1.0);
    let steep = d > n - 1.0 - 2.0 / p;
    let mut rows = Vec::new();
    if p < knee && !approx_eq(p, knee) && high {
        rows.push(power(p - 1.0, "short-range-1"));
    }
    if approx_eq(p, knee) && high {
        rows.push(power_log(
            p - 1.0,
            (p - 1.0) * (4.0 - n).max(1.0),
            "short-range-2",
        ));
    }
    if p > knee && !approx_eq(p, knee) && p < pg && steep {
        let a = (p - 1.0) / ((n + 1.0) - (n - 1.0) * p);
        rows.push(power_log(a, a * (3.0 - n).max(0.0), "short-range-3"));
    }
    if p < knee && !approx_eq(p, knee) && !high {
        let g1 = gamma1(p, n, d);
        rows.push(power_log(
            2.0 * p * (p - 1.0) / g1,
            -(2.0 * (p - 1.0) / g1) * (3.0 - n).max(0.0),
            "short-range-4",
        ));
    }
    if approx_eq(p, knee) && !high {
        let g = gamma(p, n + d);
        rows.push(power_log(
            2.0 * p * (p - 1.0) / g,
            2.0 * (p - 1.0) / g,
            "short-range-5",
        ));
    }
    if p > knee && !approx_eq(p, knee) && p < e.ps_shift && !steep {
        rows.push(power(
            2.0 * p * (p - 1.0) / gamma(p, n + d),
            "short-range-6",
        ));
    }
    Ok(best(rows, p < pg.max(e.ps_shift)))
}

fn classify_general(
    profile: &CoefficientProfile,
    p: f64,
    e: &ExponentSet,
) -> Result<LifespanBound> {
    let n = profile.n as f64;
    let d = profile.d_inf;
    let m_pot = n + e.rho_v_inf;
    let mut rows = Vec::new();
    if p > e.p2 && p < e.p3 && !approx_eq(p, e.p3) {
        rows.push(power(p - 1.0, "general-1"));
    }
    if approx_eq(p, e.p3) && e.p3 > e.p2 {
        rows.push(power_log(p - 1.0, p - 1.0, "general-2"));
    }
    if p > e.p2.max(e.p3) && !approx_eq(p, e.p3) && p < e.pg_shift {
        rows.push(power(
            (p - 1.0) / (m_pot + 1.0 - (m_pot - 1.0) * p),
            "general-3",
        ));
    }
    if p > e.p0 && p < e.p3.min(e.p5) && !approx_eq(p, e.p3) {
        let g2 = gamma2(p, profile.n, d, profile.v_inf)?;
        rows.push(power(2.0 * p * (p - 1.0) / g2, "general-4"));
    }
    if approx_eq(p, e.p3) && e.p3 > e.p0 && e.p3 < e.ps_shift {
        let g = gamma(p, n + d);
        rows.push(power_log(
            2.0 * p * (p - 1.0) / g,
            2.0 * (p - 1.0) / g,
            "general-5",
        ));
    }
    if p > e.p0.max(e.p3) && !approx_eq(p, e.p3) && p < e.ps_shift {
        rows.push(power(2.0 * p * (p - 1.0) / gamma(p, n + d), "general-6"));
    }
    // The combined branch extends below p0; as printed, it is confined to
    // p ≤ p0 where the other rows are unavailable.
    if p > e.p4 && (p <= e.p0 || approx_eq(p, e.p0)) && p < crate::exponents::glassey(n + d) {
        rows.push(power(
            2.0 * (p - 1.0) / ((n + d + 1.0) - (n + d - 1.0) * p),
            "general-7",
        ));
    }
    Ok(best(rows, p > e.p0 && p < e.p_c))
}

fn classify_vanishing(
    profile: &CoefficientProfile,
    p: f64,
    e: &ExponentSet,
) -> Result<LifespanBound> {
    // Compact support: tail indices vanish and D is numerically zero on a
    // far probe grid.
    let far = [100.0f64.max(10.0 * profile.radius), 1e3, 1e4];
    if profile.d_inf != 0.0
        || profile.d0 != 0.0
        || !probe_identically_zero(&profile.damping, &far)
    {
        return Err(Error::Precondition(
            "vanishing-damping classification needs compactly supported D".into(),
        ));
    }
    let n = profile.n as f64;
    let m_pot = n + e.rho_v_inf;
    let ps = crate::exponents::strauss(n);
    let pg = crate::exponents::glassey(m_pot);
    let mut rows = Vec::new();
    if p < ps && !approx_eq(p, ps) {
        rows.push(power(2.0 * p * (p - 1.0) / gamma(p, n), "vanishing-LS"));
    }
    if p < pg && !approx_eq(p, pg) {
        rows.push(power(
            (p - 1.0) / (m_pot + 1.0 - (m_pot - 1.0) * p),
            "vanishing-LG",
        ));
    }
    Ok(best(rows, p < ps.max(pg)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn free3() -> CoefficientProfile {
        CoefficientProfile::free(3)
    }

    #[test]
    fn scattering_subcritical_rows() {
        let prof = free3();
        // p = 2, n = 3: gamma(2,3) = 2, a = 2·2·1/2 = 2
        let b = classify(Theorem::Scattering, &prof, 2.0).unwrap();
        assert_eq!(b.form, BoundForm::Power);
        assert_eq!(b.case_id, "scattering-2");
        assert_relative_eq!(b.a, 2.0, epsilon = 1e-12);
        // below the knee: gamma0 branch
        let b = classify(Theorem::Scattering, &prof, 1.2).unwrap();
        assert_eq!(b.case_id, "scattering-1");
        assert_relative_eq!(
            b.a,
            2.0 * 1.2 * 0.2 / gamma0(1.2, 3.0),
            epsilon = 1e-12
        );
    }

    #[test]
    fn scattering_rows_agree_at_knee() {
        let prof = free3();
        let b = classify(Theorem::Scattering, &prof, 1.5).unwrap();
        // both rows match and agree exactly; the earlier row wins the tie
        assert_eq!(b.case_id, "scattering-1");
        assert_relative_eq!(b.a, 2.0 * 1.5 * 0.5 / gamma(1.5, 3.0), epsilon = 1e-12);
    }

    #[test]
    fn scattering_critical_and_beyond() {
        let prof = free3();
        let ps = crate::exponents::strauss(3.0);
        let b = classify(Theorem::Scattering, &prof, ps).unwrap();
        assert_eq!(b.form, BoundForm::Exponential);
        assert_relative_eq!(b.a, ps * (ps - 1.0), epsilon = 1e-12);
        let b = classify(Theorem::Scattering, &prof, 2.6).unwrap();
        assert_eq!(b.form, BoundForm::None);
        assert_eq!(b.case_id, "no-blow-up-claimed");
    }

    #[test]
    fn scattering_requires_envelope_and_zero_potential() {
        let prof = CoefficientProfile::gkw(1.0);
        assert!(classify(Theorem::Scattering, &prof, 1.5).is_err());
        let mut prof = CoefficientProfile::scattering(3, 1.0, 1.5);
        prof.beta = Some(0.9);
        assert!(classify(Theorem::Scattering, &prof, 1.5).is_err());
    }

    #[test]
    fn p_not_above_one_rejected() {
        assert!(classify(Theorem::General, &free3(), 1.0).is_err());
        assert!(classify(Theorem::General, &free3(), 0.5).is_err());
    }

    #[test]
    fn general_gkw_selected_rows() {
        let prof = CoefficientProfile::gkw(1.0);
        // p3 = 4/3 < p = 1.5 < p_S(5): rows 3 and 6 both match; row 6's
        // a = 2p(p-1)/gamma(p,5) = 1.5/2 = 0.75 beats row 3's a = 1.
        let b = classify(Theorem::General, &prof, 1.5).unwrap();
        assert_eq!(b.case_id, "general-6");
        assert_relative_eq!(b.a, 0.75, epsilon = 1e-12);
        // p = 1.2 < p3: both the single-functional row (a = p - 1 = 0.2)
        // and the gamma_2 row apply; the gamma_2 bound is smaller since
        // gamma_2(p) > 2p on (p0, p3)
        let b = classify(Theorem::General, &prof, 1.2).unwrap();
        assert_eq!(b.case_id, "general-4");
        let g2 = gamma2(1.2, 3, 2.0, 2.0).unwrap();
        assert_relative_eq!(g2, 2.64, epsilon = 1e-12);
        assert_relative_eq!(b.a, 2.0 * 1.2 * 0.2 / g2, epsilon = 1e-12);
        // at the knee p = p3 = 4/3 the log row with gamma(p, 5) wins
        let b = classify(Theorem::General, &prof, 4.0 / 3.0).unwrap();
        assert_eq!(b.case_id, "general-5");
        assert_eq!(b.form, BoundForm::PowerLog);
        let g = gamma(4.0 / 3.0, 5.0);
        assert_relative_eq!(b.a, 2.0 * (4.0 / 3.0) * (1.0 / 3.0) / g, epsilon = 1e-12);
        assert_relative_eq!(b.b, 2.0 * (1.0 / 3.0) / g, epsilon = 1e-12);
        // beyond p_c nothing is claimed
        let b = classify(Theorem::General, &prof, 1.8).unwrap();
        assert_eq!(b.form, BoundForm::None);
    }

    #[test]
    fn general_low_branch_below_p0() {
        // singular profile with p4 < p0 and p4 < p_G(n + d_inf): the
        // combined branch row applies below p0 where nothing else does.
        // d0 = 1 > 0 with theta = 0 gives p4 < p2 = p0, and the small
        // d_inf = 0.2 keeps the Glassey cutoff above p4.
        let prof = CoefficientProfile::singular_demo(3, 1.0, 2.0, 0.2, 3.0);
        let e = thresholds(&prof).unwrap();
        let pg_shift = crate::exponents::glassey(3.0 + prof.d_inf);
        assert!(e.p4 < e.p0, "need p4 < p0 for this scenario");
        assert!(e.p4 < pg_shift, "need a nonempty combined-branch window");
        assert!(e.p0 < e.p_c, "profile must satisfy the admissibility gap");
        let p = 0.5 * (e.p4 + e.p0.min(pg_shift));
        let b = classify(Theorem::General, &prof, p).unwrap();
        assert_eq!(b.case_id, "general-7");
        let n_d = 3.0 + prof.d_inf;
        assert_relative_eq!(
            b.a,
            2.0 * (p - 1.0) / ((n_d + 1.0) - (n_d - 1.0) * p),
            epsilon = 1e-12
        );
        // below p4 nothing is claimed
        let b = classify(Theorem::General, &prof, 0.5 * (1.0 + e.p4)).unwrap();
        assert_eq!(b.form, BoundForm::None);
    }

    #[test]
    fn short_range_branches() {
        // n = 3, d_inf = 0 profile: p = 1.2 sits in the gamma1 branch since
        // d_inf = 0 <= (n-1)(2/p - 1) = 1.333...
        let prof = free3();
        let b = classify(Theorem::ShortRange, &prof, 1.2).unwrap();
        assert_eq!(b.case_id, "short-range-4");
        let g1 = gamma1(1.2, 3.0, 0.0);
        assert_relative_eq!(b.a, 2.0 * 1.2 * 0.2 / g1, epsilon = 1e-12);
        // n = 3: max(3-n, 0) = 0, so no log factor survives
        assert_eq!(b.form, BoundForm::Power);
        // above the knee with d_inf = 0 <= n-1-2/p: plain gamma branch
        let b = classify(Theorem::ShortRange, &prof, 2.0).unwrap();
        assert_eq!(b.case_id, "short-range-6");
        assert_relative_eq!(b.a, 2.0 * 2.0 / gamma(2.0, 3.0), epsilon = 1e-12);
    }

    #[test]
    fn short_range_high_damping_branches() {
        // d_inf = 2 > (n-1)(2/p-1) for p close to the knee: linear-rate rows
        let prof = CoefficientProfile::gkw(1.0);
        // gkw has v_inf = 2, which the short-range theorem excludes
        assert!(classify(Theorem::ShortRange, &prof, 1.3).is_err());
        let mut prof = CoefficientProfile::scale_invariant(3, 2.0, 0.0);
        prof.label = "critical damping".into();
        let b = classify(Theorem::ShortRange, &prof, 1.4).unwrap();
        assert_eq!(b.case_id, "short-range-1");
        assert_relative_eq!(b.a, 0.4, epsilon = 1e-12);
        let b = classify(Theorem::ShortRange, &prof, 1.5).unwrap();
        assert_eq!(b.case_id, "short-range-2");
        assert_eq!(b.form, BoundForm::PowerLog);
        assert_relative_eq!(b.b, 0.5 * (4.0 - 3.0), epsilon = 1e-12);
        let b = classify(Theorem::ShortRange, &prof, 1.8).unwrap();
        assert_eq!(b.case_id, "short-range-3");
        assert_relative_eq!(b.a, 0.8 / (4.0 - 2.0 * 1.8), epsilon = 1e-12);
    }

    #[test]
    fn vanishing_damping_rows() {
        // free profile has (trivially) compactly supported damping
        let prof = free3();
        let b = classify(Theorem::VanishingDamping, &prof, 2.0).unwrap();
        assert_eq!(b.case_id, "vanishing-LS");
        assert_relative_eq!(b.a, 2.0, epsilon = 1e-12);
        // n = 2 with a potential tail: L_G can win for small p
        let mut prof = CoefficientProfile::free(2);
        prof.potential = crate::profile::RadialFn::new(|r| 2.0 / (1.0 + r * r));
        prof.v_inf = 2.0;
        let e = thresholds(&prof).unwrap();
        // 2/p >= 2 rho + n - 1 marks where L_G <= L_S; rho(2) for n = 2 is
        // sqrt(2), so the window is empty here and L_S should win
        assert!(e.rho_v_inf > 0.5);
        let b = classify(Theorem::VanishingDamping, &prof, 1.1).unwrap();
        assert_eq!(b.case_id, "vanishing-LS");
        // a non-compact damping is rejected
        let prof = CoefficientProfile::scattering(3, 1.0, 2.0);
        assert!(classify(Theorem::VanishingDamping, &prof, 1.5).is_err());
    }

    #[test]
    fn vanishing_lg_wins_when_potential_small_in_2d() {
        // n = 2, v_inf = 1/16: rho = 1/4, 2rho + n - 1 = 3/2, so L_G <= L_S
        // for p <= 4/3
        let mut prof = CoefficientProfile::free(2);
        prof.potential = crate::profile::RadialFn::new(|r| 0.0625 / (1.0 + r * r));
        prof.v_inf = 0.0625;
        let b = classify(Theorem::VanishingDamping, &prof, 1.25).unwrap();
        assert_eq!(b.case_id, "vanishing-LG");
        let b = classify(Theorem::VanishingDamping, &prof, 1.6).unwrap();
        assert_eq!(b.case_id, "vanishing-LS");
    }

    #[test]
    fn rescaled_profile_selects_same_row() {
        // the lambda0 rescaling D(r) -> s D(sr), V(r) -> s² V(sr) leaves
        // every threshold of a d0 = 0 profile unchanged
        for s in [0.5, 2.0, 7.0] {
            let base = CoefficientProfile::gkw(1.0);
            let scaled = {
                let mut p = CoefficientProfile::new(
                    3,
                    crate::profile::RadialFn::new(move |r| {
                        let b = CoefficientProfile::gkw(1.0);
                        s * b.damping_at(s * r)
                    }),
                    crate::profile::RadialFn::new(move |r| {
                        let b = CoefficientProfile::gkw(1.0);
                        s * s * b.potential_at(s * r)
                    }),
                    0.0,
                    0.0,
                    2.0,
                    2.0,
                    2.0,
                    "gkw-rescaled",
                );
                p.radius = 1.0 / s;
                p
            };
            for p in [1.2, 4.0 / 3.0, 1.5, 1.7] {
                let b0 = classify(Theorem::General, &base, p).unwrap();
                let b1 = classify(Theorem::General, &scaled, p).unwrap();
                assert_eq!(b0.case_id, b1.case_id);
                assert_relative_eq!(b0.a, b1.a, epsilon = 1e-12);
                assert_relative_eq!(b0.b, b1.b, epsilon = 1e-12);
            }
        }
    }
}
