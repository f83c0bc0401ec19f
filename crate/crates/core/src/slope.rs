//! Critical point of the inventory polynomial, optimal half-plane slope,
//! growth factor and the subexponential exponent of reluctant models.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::stepset::StepSet;

/// Relative tolerance on the gradient at the returned critical point.
pub const CRITICAL_TOL: f64 = 1e-12;
pub const NEWTON_MAX_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalPoint {
    pub alpha: f64,
    pub beta: f64,
    pub s_value: f64,
    /// `|grad S| / S` at `(alpha, beta)`.
    pub gradient_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SlopeKind {
    Rational { p: u64, q: u64 },
    Irrational,
    /// `m = 0` for singular models or `m = infinity`; carries the exact pair.
    Boundary { p: u64, q: u64 },
}

impl SlopeKind {
    pub fn exact_pq(&self) -> Option<(u64, u64)> {
        match *self {
            SlopeKind::Rational { p, q } | SlopeKind::Boundary { p, q } => Some((p, q)),
            SlopeKind::Irrational => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SlopeKind::Rational { .. } => "rational",
            SlopeKind::Irrational => "irrational",
            SlopeKind::Boundary { .. } => "boundary",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ExponentVariant {
    /// `1 + pi / arccos(-c)`
    A,
    /// `1 + pi / arccos(c)`
    B,
}

/// Variant selected by fitting exact counts of the six-step reluctant model
/// (see the `acceptance` test target, criterion 7).
pub const DEFAULT_VARIANT: ExponentVariant = ExponentVariant::A;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeInfo {
    pub critical: Option<CriticalPoint>,
    /// Angle in `[0, pi/2]` with `tan(theta_star) = m`.
    pub theta_star: f64,
    /// `None` encodes `m = infinity`.
    pub slope_m: Option<f64>,
    pub slope_kind: SlopeKind,
    pub rho_inv: f64,
    pub exponent_r: Option<f64>,
}

/// Exact test for the existence of a positive critical point: the convex
/// function `S(e^u, e^v)` attains its infimum iff every direction has some
/// step with positive projection, i.e. the origin is interior to the convex
/// hull of the steps.
pub fn has_positive_critical_point(s: &StepSet) -> bool {
    recession_directions(s).is_empty()
}

/// Integer directions `d != 0` with `d . s <= 0` for every step. When the
/// set is nonempty the extreme rays of that cone are among `+-perp(s)`.
fn recession_directions(s: &StepSet) -> Vec<(i64, i64)> {
    let nonzero: Vec<_> = s.steps().iter().filter(|t| (t.dx, t.dy) != (0, 0)).collect();
    if nonzero.is_empty() {
        return vec![(1, 0), (0, 1), (-1, 0), (0, -1)];
    }
    let mut out = Vec::new();
    for t in &nonzero {
        for d in [(-t.dy, t.dx), (t.dy, -t.dx)] {
            if nonzero.iter().all(|u| d.0 * u.dx + d.1 * u.dy <= 0) && !out.contains(&d) {
                out.push(d);
            }
        }
    }
    out
}

/// Probabilities `exp(i u + j v) / S` and `ln S(e^u, e^v)`, computed stably.
fn tilted(s: &StepSet, u: f64, v: f64) -> (f64, [f64; 2], [f64; 3]) {
    let expo: Vec<f64> = s.steps().iter().map(|t| t.dx as f64 * u + t.dy as f64 * v).collect();
    let top = expo.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut z = 0.0;
    let mut m1 = [0.0; 2];
    let mut m2 = [0.0; 3];
    for (t, e) in s.steps().iter().zip(&expo) {
        let w = (e - top).exp();
        let (i, j) = (t.dx as f64, t.dy as f64);
        z += w;
        m1[0] += w * i;
        m1[1] += w * j;
        m2[0] += w * i * i;
        m2[1] += w * i * j;
        m2[2] += w * j * j;
    }
    let mean = [m1[0] / z, m1[1] / z];
    let cov = [
        m2[0] / z - mean[0] * mean[0],
        m2[1] / z - mean[0] * mean[1],
        m2[2] / z - mean[1] * mean[1],
    ];
    (top + z.ln(), mean, cov)
}

/// Minimizes `ln S(e^u, e^v)` by damped Newton from `(0, 0)`. Returns
/// `Ok(None)` for singular models (no positive critical point).
pub fn critical_point(s: &StepSet) -> Result<Option<CriticalPoint>> {
    if !has_positive_critical_point(s) {
        return Ok(None);
    }
    let (mut u, mut v) = (0.0f64, 0.0f64);
    for _ in 0..NEWTON_MAX_ITER {
        let (g, mean, cov) = tilted(s, u, v);
        if mean[0].abs().max(mean[1].abs()) <= CRITICAL_TOL * 0.1 {
            return Ok(Some(finish(s, u, v)));
        }
        let det = cov[0] * cov[2] - cov[1] * cov[1];
        let (mut du, mut dv) = if det > 1e-300 {
            (
                -(cov[2] * mean[0] - cov[1] * mean[1]) / det,
                -(-cov[1] * mean[0] + cov[0] * mean[1]) / det,
            )
        } else {
            (-mean[0], -mean[1])
        };
        let slope = du * mean[0] + dv * mean[1];
        if slope >= 0.0 {
            du = -mean[0];
            dv = -mean[1];
        }
        let slope = du * mean[0] + dv * mean[1];
        let mut t = 1.0;
        // Close to the minimum the decrease of `g` drowns in rounding;
        // take the pure Newton step there.
        while slope.abs() > 1e-14 {
            let (gt, _, _) = tilted(s, u + t * du, v + t * dv);
            if gt <= g + 1e-4 * t * slope || t < 1e-12 {
                break;
            }
            t *= 0.5;
        }
        u += t * du;
        v += t * dv;
        if !(u.is_finite() && v.is_finite()) {
            break;
        }
    }
    let (_, mean, _) = tilted(s, u, v);
    if u.is_finite() && v.is_finite() && mean[0].abs().max(mean[1].abs()) <= CRITICAL_TOL {
        return Ok(Some(finish(s, u, v)));
    }
    Err(Error::Numeric(format!(
        "critical point search did not converge in {NEWTON_MAX_ITER} iterations"
    )))
}

fn finish(s: &StepSet, u: f64, v: f64) -> CriticalPoint {
    let (alpha, beta) = (u.exp(), v.exp());
    let e = s.inventory_eval(alpha, beta).expect("positive point");
    CriticalPoint {
        alpha,
        beta,
        s_value: e.value,
        gradient_norm: e.grad.0.hypot(e.grad.1) / e.value,
    }
}

/// `c = S_xy / sqrt(S_xx S_yy)` at the critical point.
pub fn correlation(s: &StepSet, cp: &CriticalPoint) -> Result<f64> {
    let e = s.inventory_eval(cp.alpha, cp.beta)?;
    let (sxx, sxy, syy) = e.hessian;
    let c = sxy / (sxx * syy).sqrt();
    if !c.is_finite() || c.abs() >= 1.0 {
        return Err(Error::Domain(format!("degenerate covariance, c = {c}")));
    }
    Ok(c)
}

pub fn exponent_from_correlation(c: f64, variant: ExponentVariant) -> Result<f64> {
    if !c.is_finite() || c.abs() >= 1.0 {
        return Err(Error::Domain(format!("degenerate covariance, c = {c}")));
    }
    Ok(match variant {
        ExponentVariant::A => 1.0 + PI / (-c).acos(),
        ExponentVariant::B => 1.0 + PI / c.acos(),
    })
}

/// Subexponential exponent `r` of a reluctant model.
pub fn exponent_r(s: &StepSet, variant: ExponentVariant) -> Result<f64> {
    let (dx, dy) = s.drift();
    if !(dx < 0 && dy < 0) {
        return Err(Error::Argument(format!(
            "exponent formula needs a reluctant model, drift is ({dx},{dy})"
        )));
    }
    let cp = critical_point(s)?
        .ok_or_else(|| Error::Domain("no positive critical point".into()))?;
    exponent_from_correlation(correlation(s, &cp)?, variant)
}

/// Continued-fraction rationality detector: the first convergent `p/q`
/// with `q <= 64` and `|m - p/q| < 1e-9 max(1, |m|)`.
pub fn detect_rational(m: f64) -> Option<(u64, u64)> {
    if !(m.is_finite() && m >= 0.0) {
        return None;
    }
    let tol = 1e-9 * m.abs().max(1.0);
    let (mut p0, mut q0, mut p1, mut q1) = (0u64, 1u64, 1u64, 0u64);
    let mut x = m;
    for _ in 0..64 {
        let a = x.floor();
        if a > 1e15 {
            return None;
        }
        let a = a as u64;
        let (p2, q2) = (a.checked_mul(p1)?.checked_add(p0)?, a.checked_mul(q1)?.checked_add(q0)?);
        if q2 > 64 {
            return None;
        }
        if (m - p2 as f64 / q2 as f64).abs() < tol {
            return Some((p2, q2));
        }
        let frac = x - a as f64;
        if frac <= 0.0 {
            return None;
        }
        x = 1.0 / frac;
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
    }
    None
}

/// Minimizer of `S` over `[1, inf)^2`, as `(ln x, ln y)` with both >= 0.
/// Coincides with the critical point whenever `alpha, beta >= 1`.
pub fn quadrant_minimizer(s: &StepSet, cp: Option<&CriticalPoint>) -> (f64, f64) {
    if let Some(cp) = cp {
        if cp.alpha >= 1.0 && cp.beta >= 1.0 {
            return (cp.alpha.ln(), cp.beta.ln());
        }
    }
    let along = |dir: (f64, f64)| -> (f64, f64) {
        let t = minimize_on_ray(s, dir);
        (t, tilted(s, t * dir.0, t * dir.1).0)
    };
    let (tu, gu) = along((1.0, 0.0));
    let (tv, gv) = along((0.0, 1.0));
    if gu <= gv {
        (tu, 0.0)
    } else {
        (0.0, tv)
    }
}

/// `argmin_{t >= 0} ln S(e^{t d.0}, e^{t d.1})`, possibly `+inf` if the
/// function keeps decreasing.
fn minimize_on_ray(s: &StepSet, d: (f64, f64)) -> f64 {
    let deriv = |t: f64| {
        let (_, m, c) = tilted(s, t * d.0, t * d.1);
        (m[0] * d.0 + m[1] * d.1, c[0] * d.0 * d.0 + 2.0 * c[1] * d.0 * d.1 + c[2] * d.1 * d.1)
    };
    if deriv(0.0).0 >= 0.0 {
        return 0.0;
    }
    let mut hi = 1.0;
    while deriv(hi).0 < 0.0 {
        hi *= 2.0;
        if hi > 1e6 {
            return f64::INFINITY;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if deriv(mid).0 < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 * hi.max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Infimum of `S` over the open positive quadrant when it is not attained.
fn singular_infimum(s: &StepSet) -> f64 {
    let dirs = recession_directions(s);
    let zeros = s.steps().iter().filter(|t| (t.dx, t.dy) == (0, 0)).count() as f64;
    if zeros as usize == s.len() {
        return zeros;
    }
    let mut best = f64::INFINITY;
    for (k, d) in dirs.iter().enumerate() {
        // Two non-parallel recession directions: the cone has an interior
        // direction along which only the zero steps survive.
        if dirs[k + 1..].iter().any(|e| d.0 * e.1 - d.1 * e.0 != 0) {
            best = best.min(zeros);
        }
        let face: Vec<i64> = s
            .steps()
            .iter()
            .filter(|t| d.0 * t.dx + d.1 * t.dy == 0)
            .map(|t| t.dx * -d.1 + t.dy * d.0)
            .collect();
        let has_pos = face.iter().any(|&k| k > 0);
        let has_neg = face.iter().any(|&k| k < 0);
        let value = if has_pos && has_neg {
            let eval = |w: f64| face.iter().map(|&k| (k as f64 * w).exp()).sum::<f64>();
            let (mut lo, mut hi) = (-50.0f64, 50.0f64);
            for _ in 0..200 {
                let (a, b) = (lo + (hi - lo) / 3.0, hi - (hi - lo) / 3.0);
                if eval(a) < eval(b) {
                    hi = b;
                } else {
                    lo = a;
                }
            }
            eval(0.5 * (lo + hi))
        } else {
            face.iter().filter(|&&k| k == 0).count() as f64
        };
        best = best.min(value);
    }
    best
}

/// Optimal half-plane slope: `m = 0` for singular models, `m = infinity`
/// when `beta = 1`, else `m = ln(alpha) / ln(beta)`.
pub fn optimal_slope(s: &StepSet) -> Result<SlopeInfo> {
    let cp = critical_point(s)?;
    let Some(cp) = cp else {
        return Ok(SlopeInfo {
            critical: None,
            theta_star: 0.0,
            slope_m: Some(0.0),
            slope_kind: SlopeKind::Boundary { p: 0, q: 1 },
            rho_inv: singular_infimum(s),
            exponent_r: None,
        });
    };
    let (drift_x, drift_y) = s.drift();
    let exponent_r = if drift_x < 0 && drift_y < 0 {
        correlation(s, &cp)
            .and_then(|c| exponent_from_correlation(c, DEFAULT_VARIANT))
            .ok()
    } else {
        None
    };
    let (lu, lv) = quadrant_minimizer(s, Some(&cp));
    let symmetric = s.is_transpose_symmetric();
    let (slope_m, slope_kind, theta_star) = if symmetric {
        (Some(1.0), SlopeKind::Rational { p: 1, q: 1 }, PI / 4.0)
    } else if lv.abs() < 1e-13 {
        (None, SlopeKind::Boundary { p: 1, q: 0 }, FRAC_PI_2)
    } else {
        let m = lu / lv;
        let kind = match detect_rational(m) {
            Some((p, q)) => SlopeKind::Rational { p, q },
            None => SlopeKind::Irrational,
        };
        (Some(m), kind, lu.atan2(lv))
    };
    Ok(SlopeInfo {
        critical: Some(cp),
        theta_star,
        slope_m,
        slope_kind,
        rho_inv: cp.s_value,
        exponent_r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stepset::presets;
    use proptest::prelude::*;

    /// Positive root of `t^4 = t + 1` by bisection.
    fn quartic_root() -> f64 {
        let (mut lo, mut hi) = (1.0f64, 2.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid.powi(4) - mid - 1.0 < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    #[test]
    fn simple_walk_critical_point() {
        let cp = critical_point(&presets::simple()).unwrap().unwrap();
        assert!((cp.alpha - 1.0).abs() < 1e-12 && (cp.beta - 1.0).abs() < 1e-12);
        assert!((cp.s_value - 4.0).abs() < 1e-12);
    }

    #[test]
    fn symmetric_model_matches_quartic_root() {
        let t = quartic_root();
        assert!((t - 1.22074).abs() < 1e-5);
        let s = presets::symmetric_reluctant();
        let cp = critical_point(&s).unwrap().unwrap();
        assert!((cp.alpha - t).abs() < 1e-10 && (cp.beta - t).abs() < 1e-10);
        let expected = t * t + 2.0 / t + 1.0 / (t * t);
        assert!((cp.s_value - expected).abs() < 1e-10);
        assert!((cp.s_value - 3.7996).abs() < 1e-4);

        let e = s.inventory_eval(cp.alpha, cp.beta).unwrap();
        assert!((e.hessian.0 - 2.0).abs() < 1e-9 && (e.hessian.2 - 2.0).abs() < 1e-9);
        assert!((e.hessian.1 - (1.0 + t.powi(-4))).abs() < 1e-9);
        let c = correlation(&s, &cp).unwrap();
        assert!((c - 0.72515).abs() < 1e-4, "c = {c}");
    }

    #[test]
    fn reluctant_six_growth() {
        let cp = critical_point(&presets::reluctant_six()).unwrap().unwrap();
        assert!((cp.s_value - 5.3299).abs() < 1e-3, "{}", cp.s_value);
        assert!(cp.gradient_norm < 1e-10);
    }

    #[test]
    fn c_zero_gives_three() {
        assert_eq!(exponent_from_correlation(0.0, ExponentVariant::A).unwrap(), 3.0);
        assert_eq!(exponent_from_correlation(0.0, ExponentVariant::B).unwrap(), 3.0);
        assert!(exponent_from_correlation(1.0, ExponentVariant::A).is_err());
        assert!(exponent_r(&presets::simple(), ExponentVariant::A).is_err());
    }

    #[test]
    fn slope_branches() {
        let info = optimal_slope(&presets::symmetric_reluctant()).unwrap();
        assert_eq!(info.slope_kind, SlopeKind::Rational { p: 1, q: 1 });
        assert_eq!(info.slope_m, Some(1.0));

        let info = optimal_slope(&StepSet::parse("1,1;1,0;0,1").unwrap()).unwrap();
        assert!(info.critical.is_none());
        assert_eq!(info.slope_kind, SlopeKind::Boundary { p: 0, q: 1 });
        assert_eq!(info.slope_m, Some(0.0));

        // beta = 1: the y-marginal is balanced.
        let s = StepSet::parse("0,1;0,-1;-1,0;1,0;-1,0").unwrap();
        let info = optimal_slope(&s).unwrap();
        assert!((info.critical.unwrap().beta - 1.0).abs() < 1e-12);
        assert_eq!(info.slope_kind, SlopeKind::Boundary { p: 1, q: 0 });
        assert_eq!(info.slope_m, None);
        assert!((info.theta_star - FRAC_PI_2).abs() < 1e-15);

        let info = optimal_slope(&presets::simple()).unwrap();
        assert_eq!(info.rho_inv, 4.0);
    }

    #[test]
    fn singular_detection() {
        assert!(!has_positive_critical_point(&StepSet::parse("1,1").unwrap()));
        assert!(!has_positive_critical_point(&StepSet::parse("1,0;-1,0").unwrap()));
        assert!(has_positive_critical_point(&StepSet::parse("1,0;0,1;-1,-1;0,0").unwrap()));
        assert!(has_positive_critical_point(&presets::reluctant_six()));
        let info = optimal_slope(&StepSet::parse("1,0;-1,0").unwrap()).unwrap();
        assert!((info.rho_inv - 2.0).abs() < 1e-9);
        let info = optimal_slope(&StepSet::parse("1,1;1,0;0,1").unwrap()).unwrap();
        assert_eq!(info.rho_inv, 0.0);
    }

    #[test]
    fn rationality_detector() {
        assert_eq!(detect_rational(0.5), Some((1, 2)));
        assert_eq!(detect_rational(2.0), Some((2, 1)));
        assert_eq!(detect_rational(0.0), Some((0, 1)));
        assert_eq!(detect_rational(7.0 / 13.0), Some((7, 13)));
        assert_eq!(detect_rational(2f64.sqrt()), None);
        assert_eq!(detect_rational(0.6309297535714574), None);
    }

    fn arb_nonsingular() -> impl Strategy<Value = StepSet> {
        prop::collection::vec((-2i64..=2, -2i64..=2), 3..8)
            .prop_map(|v| StepSet::from_pairs(&v).unwrap())
            .prop_filter("needs a critical point", has_positive_critical_point)
    }

    proptest! {
        #[test]
        fn gradient_vanishes_and_growth_bounded(s in arb_nonsingular()) {
            let cp = critical_point(&s).unwrap().unwrap();
            let e = s.inventory_eval(cp.alpha, cp.beta).unwrap();
            prop_assert!(e.grad.0.abs() < 1e-10 * e.value);
            prop_assert!(e.grad.1.abs() < 1e-10 * e.value);
            prop_assert!(cp.s_value <= s.len() as f64 * (1.0 + 1e-12));
            let balanced = s.drift() == (0, 0);
            prop_assert_eq!((cp.s_value - s.len() as f64).abs() < 1e-9, balanced);
        }

        #[test]
        fn newton_start_does_not_matter(s in arb_nonsingular(), u0 in -1.0f64..1.0, v0 in -1.0f64..1.0) {
            let cp = critical_point(&s).unwrap().unwrap();
            // Plain Newton from a shifted start on the same convex objective.
            let (mut u, mut v) = (u0, v0);
            for _ in 0..NEWTON_MAX_ITER {
                let (g, m, c) = tilted(&s, u, v);
                let det = c[0] * c[2] - c[1] * c[1];
                let du = -(c[2] * m[0] - c[1] * m[1]) / det;
                let dv = -(-c[1] * m[0] + c[0] * m[1]) / det;
                let mut t = 1.0;
                while tilted(&s, u + t * du, v + t * dv).0 > g && t > 1e-12 {
                    t *= 0.5;
                }
                u += t * du;
                v += t * dv;
            }
            prop_assert!((u.exp() - cp.alpha).abs() < 1e-8 * cp.alpha);
            prop_assert!((v.exp() - cp.beta).abs() < 1e-8 * cp.beta);
        }

        #[test]
        fn transpose_symmetric_sets_are_diagonal(v in prop::collection::vec((-2i64..=2, -2i64..=2), 2..5)) {
            let mut pairs = v.clone();
            pairs.extend(v.iter().map(|&(a, b)| (b, a)));
            let s = StepSet::from_pairs(&pairs).unwrap();
            if let Some(cp) = critical_point(&s).unwrap() {
                prop_assert!((cp.alpha - cp.beta).abs() < 1e-10 * cp.alpha);
                let info = optimal_slope(&s).unwrap();
                prop_assert_eq!(info.slope_kind, SlopeKind::Rational { p: 1, q: 1 });
            }
        }
    }
}
