//! Projection of a step set onto the normal of a rational half-plane, and
//! rational approximation of irrational slopes.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::stepset::StepSet;

/// Half-plane `x p + y q >= 0`, i.e. slope `m = p / q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RationalSlope {
    pub p: u64,
    pub q: u64,
    /// Approximation tolerance, zero when the slope is exact.
    pub delta_used: f64,
}

impl RationalSlope {
    pub fn exact(p: u64, q: u64) -> Result<Self> {
        if p == 0 && q == 0 {
            return Err(Error::Argument("slope (0, 0) is not a direction".into()));
        }
        let g = p.gcd(&q);
        Ok(RationalSlope { p: p / g, q: q / g, delta_used: 0.0 })
    }

    /// `None` for the vertical slope `q = 0`.
    pub fn value(&self) -> Option<f64> {
        (self.q != 0).then(|| self.p as f64 / self.q as f64)
    }
}

impl fmt::Display for RationalSlope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

impl FromStr for RationalSlope {
    type Err = Error;

    /// Parses `p/q`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse {
            token: s.to_string(),
            reason: "expected a slope `p/q` with nonnegative integers".into(),
        };
        let (p, q) = s.trim().split_once('/').ok_or_else(bad)?;
        let p: u64 = p.trim().parse().map_err(|_| bad())?;
        let q: u64 = q.trim().parse().map_err(|_| bad())?;
        RationalSlope::exact(p, q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Terminal {
    pub id: usize,
    pub weight: i64,
    /// Index of the originating 2D step.
    pub origin: usize,
}

/// Integer-weighted one-dimensional model; one terminal per multiset
/// element.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OneDModel {
    pub terminals: Vec<Terminal>,
    pub a_bar: i64,
    pub b_bar: i64,
}

impl OneDModel {
    /// Model whose terminal `k` has weight `weights[k]` and origin `k`.
    pub fn from_weights(weights: &[i64]) -> Self {
        let terminals = weights
            .iter()
            .enumerate()
            .map(|(k, &w)| Terminal { id: k, weight: w, origin: k })
            .collect();
        Self::with_terminals(terminals)
    }

    fn with_terminals(terminals: Vec<Terminal>) -> Self {
        let a_bar = terminals.iter().map(|t| t.weight).max().unwrap_or(0).max(0);
        let b_bar = -terminals.iter().map(|t| t.weight).min().unwrap_or(0).min(0);
        OneDModel { terminals, a_bar, b_bar }
    }

    pub fn weights(&self) -> Vec<i64> {
        self.terminals.iter().map(|t| t.weight).collect()
    }

    pub fn len(&self) -> usize {
        self.terminals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terminals.is_empty()
    }

    pub fn is_trivial(&self) -> bool {
        self.a_bar < 1 || self.b_bar < 1
    }

    pub fn drift(&self) -> i64 {
        self.terminals.iter().map(|t| t.weight).sum()
    }

    /// `A(z) = sum of z^w` over terminals.
    pub fn eval(&self, z: f64) -> f64 {
        self.terminals.iter().map(|t| z.powi(t.weight as i32)).sum()
    }

    /// `(argmin, min)` of `A(z)` over `z >= z_min`: the exponential growth
    /// of nonnegative walks when `z_min = 1`.
    pub fn minimize(&self, z_min: f64) -> (f64, f64) {
        let deriv = |z: f64| -> f64 {
            self.terminals
                .iter()
                .map(|t| t.weight as f64 * z.powi(t.weight as i32 - 1))
                .sum()
        };
        if deriv(z_min) >= 0.0 || self.a_bar == 0 {
            return (z_min, self.eval(z_min));
        }
        let mut hi = z_min * 2.0;
        while deriv(hi) < 0.0 {
            hi *= 2.0;
        }
        let mut lo = z_min;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if deriv(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let z = 0.5 * (lo + hi);
        (z, self.eval(z))
    }

    /// Exponential growth of nonnegative walks, `min over z >= 1 of A(z)`.
    pub fn growth(&self) -> f64 {
        self.minimize(1.0).1
    }
}

/// Weights `i p + j q`, one terminal per step.
pub fn project(s: &StepSet, slope: &RationalSlope) -> Result<OneDModel> {
    let (p, q) = (slope.p as i64, slope.q as i64);
    let terminals: Vec<Terminal> = s
        .steps()
        .iter()
        .enumerate()
        .map(|(k, st)| Terminal { id: k, weight: st.dx * p + st.dy * q, origin: k })
        .collect();
    let m = OneDModel::with_terminals(terminals);
    let (p, q) = (slope.p, slope.q);
    if m.a_bar < 1 {
        return Err(Error::TrivialProjection { missing: "positive", p, q });
    }
    if m.b_bar < 1 {
        return Err(Error::TrivialProjection { missing: "negative", p, q });
    }
    Ok(m)
}

/// Divides all weights by the gcd of the nonzero ones.
pub fn normalize(m: &OneDModel) -> OneDModel {
    let g = m
        .terminals
        .iter()
        .filter(|t| t.weight != 0)
        .fold(0i64, |g, t| g.gcd(&t.weight.abs()));
    if g <= 1 {
        return m.clone();
    }
    OneDModel::with_terminals(
        m.terminals
            .iter()
            .map(|t| Terminal { weight: t.weight / g, ..*t })
            .collect(),
    )
}

/// The fraction of smallest denominator within `delta` of `m`; among
/// fractions with that denominator, the closest to `m`.
pub fn rational_approx(m: f64, delta: f64) -> Result<RationalSlope> {
    if !(m.is_finite() && m >= 0.0) {
        return Err(Error::Argument(format!("slope {m} must be finite and nonnegative")));
    }
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::Argument(format!("tolerance {delta} must be positive")));
    }
    let mr = BigRational::from_float(m).expect("finite");
    let dr = BigRational::from_float(delta).expect("finite");
    let hi = &mr + &dr;
    let lo = (&mr - &dr).max(BigRational::zero());
    let (_, q) = simplest_in(&lo, &hi);
    let qr = BigRational::from_integer(q.clone());
    let center = &mr * &qr;
    let mut best: Option<(BigInt, BigRational)> = None;
    for p in [center.floor().to_integer(), center.ceil().to_integer()] {
        if p.is_negative() {
            continue;
        }
        let err = (BigRational::new(p.clone(), q.clone()) - &mr).abs();
        if err <= dr && best.as_ref().is_none_or(|(_, e)| err < *e) {
            best = Some((p, err));
        }
    }
    let (p, _) = best.expect("minimal denominator admits a numerator");
    let to_u64 = |v: &BigInt| {
        v.to_u64()
            .ok_or_else(|| Error::Numeric("approximant does not fit in 64 bits".into()))
    };
    Ok(RationalSlope { p: to_u64(&p)?, q: to_u64(&q)?, delta_used: delta })
}

/// Simplest fraction in the closed interval `[lo, hi]`, `0 <= lo <= hi`,
/// by continued-fraction descent of the Stern-Brocot tree.
fn simplest_in(lo: &BigRational, hi: &BigRational) -> (BigInt, BigInt) {
    let c = lo.ceil();
    if &c <= hi {
        return (c.to_integer(), BigInt::one());
    }
    let a = lo.floor();
    let (p, q) = simplest_in(&(hi - &a).recip(), &(lo - &a).recip());
    (a.to_integer() * &p + q, p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum DeltaPolicy {
    /// `1 / (n + 1)`
    Exact,
    /// `1 / sqrt(n)`
    Sqrt,
    Fixed(f64),
}

impl FromStr for DeltaPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(DeltaPolicy::Exact),
            "sqrt" => Ok(DeltaPolicy::Sqrt),
            _ => {
                let v = s
                    .strip_prefix("fixed:")
                    .and_then(|v| v.parse::<f64>().ok())
                    .ok_or_else(|| Error::Argument(format!(
                        "unknown delta policy `{s}` (expected exact, sqrt or fixed:<delta>)"
                    )))?;
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::Argument(format!("fixed delta {v} must be positive")));
                }
                Ok(DeltaPolicy::Fixed(v))
            }
        }
    }
}

impl fmt::Display for DeltaPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DeltaPolicy::Exact => f.write_str("exact"),
            DeltaPolicy::Sqrt => f.write_str("sqrt"),
            DeltaPolicy::Fixed(d) => write!(f, "fixed:{d}"),
        }
    }
}

pub fn choose_delta(n: usize, policy: DeltaPolicy) -> Result<f64> {
    if n == 0 {
        return Err(Error::Argument("delta policy needs n >= 1".into()));
    }
    match policy {
        DeltaPolicy::Exact => Ok(1.0 / (n as f64 + 1.0)),
        DeltaPolicy::Sqrt => Ok(1.0 / (n as f64).sqrt()),
        DeltaPolicy::Fixed(d) if d > 0.0 && d.is_finite() => Ok(d),
        DeltaPolicy::Fixed(d) => Err(Error::Argument(format!("fixed delta {d} must be positive"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stepset::presets;
    use proptest::prelude::*;

    fn slope(p: u64, q: u64) -> RationalSlope {
        RationalSlope::exact(p, q).unwrap()
    }

    #[test]
    fn projection_examples() {
        let m = project(&presets::symmetric_reluctant(), &slope(1, 1)).unwrap();
        assert_eq!(m.weights(), vec![2, -1, -1, -2]);
        assert_eq!((m.a_bar, m.b_bar), (2, 2));
        let m = project(&presets::reluctant_six(), &slope(1, 0)).unwrap();
        assert_eq!(m.weights(), vec![1, 0, -1, 1, -1, -2]);
        let s = presets::reluctant_six();
        let m = project(&s, &slope(0, 1)).unwrap();
        assert_eq!(m.weights(), s.steps().iter().map(|t| t.dy).collect::<Vec<_>>());
    }

    #[test]
    fn trivial_projection_names_side() {
        let s = StepSet::parse("1,0;0,1").unwrap();
        assert!(matches!(
            project(&s, &slope(1, 1)),
            Err(Error::TrivialProjection { missing: "negative", .. })
        ));
        let s = StepSet::parse("-1,0;0,-1").unwrap();
        assert!(matches!(
            project(&s, &slope(1, 1)),
            Err(Error::TrivialProjection { missing: "positive", .. })
        ));
    }

    #[test]
    fn normalize_examples() {
        let n = |w: &[i64]| normalize(&OneDModel::from_weights(w)).weights();
        assert_eq!(n(&[2, -2]), vec![1, -1]);
        assert_eq!(n(&[2, -1, -1, -2]), vec![2, -1, -1, -2]);
        assert_eq!(n(&[0, 4, -6]), vec![0, 2, -3]);
        assert_eq!(n(&[0, 0]), vec![0, 0]);
    }

    #[test]
    fn approximation_examples() {
        let r = rational_approx(0.6309298, 0.01).unwrap();
        assert_eq!((r.p, r.q), (5, 8));
        assert_eq!(r.delta_used, 0.01);
        let r = rational_approx(0.5, 1e-6).unwrap();
        assert_eq!((r.p, r.q), (1, 2));
        for d in [1e-9, 0.3, 2.0] {
            let r = rational_approx(1.0, d).unwrap();
            assert_eq!((r.p, r.q), (1, 1));
        }
        assert!(rational_approx(-1.0, 0.1).is_err());
        assert!(rational_approx(1.0, 0.0).is_err());
    }

    #[test]
    fn delta_policies() {
        assert_eq!(choose_delta(99, DeltaPolicy::Exact).unwrap(), 0.01);
        assert_eq!(choose_delta(100, DeltaPolicy::Sqrt).unwrap(), 0.1);
        assert_eq!(choose_delta(7, DeltaPolicy::Fixed(0.05)).unwrap(), 0.05);
        assert!(choose_delta(7, DeltaPolicy::Fixed(0.0)).is_err());
        assert!(choose_delta(0, DeltaPolicy::Exact).is_err());
        assert_eq!("fixed:0.25".parse::<DeltaPolicy>().unwrap(), DeltaPolicy::Fixed(0.25));
        assert!("fixed:-1".parse::<DeltaPolicy>().is_err());
        assert!("loose".parse::<DeltaPolicy>().is_err());
    }

    #[test]
    fn slope_parsing() {
        let s: RationalSlope = "4/6".parse().unwrap();
        assert_eq!((s.p, s.q), (2, 3));
        assert!("0/0".parse::<RationalSlope>().is_err());
        assert!("1:2".parse::<RationalSlope>().is_err());
    }

    #[test]
    fn one_d_growth_values() {
        assert!((OneDModel::from_weights(&[1, -1]).growth() - 2.0).abs() < 1e-12);
        // Negative drift: minimum at z = sqrt(2) for {+1, -1, -1}.
        let g = OneDModel::from_weights(&[1, -1, -1]).growth();
        assert!((g - 2.0 * 2f64.sqrt()).abs() < 1e-9);
        assert_eq!(OneDModel::from_weights(&[1, 1, -1]).growth(), 3.0);
    }

    /// Exhaustive check that no smaller denominator gets within `delta`.
    fn minimal_by_scan(m: f64, delta: f64, q_found: u64) -> bool {
        (1..q_found).all(|q| {
            let c = m * q as f64;
            [c.floor(), c.ceil()]
                .iter()
                .all(|&p| (m - p / q as f64).abs() > delta)
        })
    }

    proptest! {
        #[test]
        fn approximant_is_within_delta_and_minimal(m in 0.0f64..5.0, e in 2.0f64..4.0) {
            let delta = 10f64.powf(-e);
            let r = rational_approx(m, delta).unwrap();
            prop_assert!((m - r.p as f64 / r.q as f64).abs() <= delta * (1.0 + 1e-9));
            prop_assert_eq!(r.p.gcd(&r.q), 1);
            prop_assert!(minimal_by_scan(m, delta * (1.0 - 1e-9), r.q));
        }

        #[test]
        fn quadrant_walks_project_nonnegative(p in 0u64..5, q in 0u64..5, x in 0i64..50, y in 0i64..50) {
            prop_assume!(p + q > 0);
            prop_assert!(x * p as i64 + y * q as i64 >= 0);
        }

        #[test]
        fn normalize_keeps_identities(v in prop::collection::vec(-6i64..=6, 1..8), c in 1i64..5) {
            let scaled: Vec<i64> = v.iter().map(|w| w * c).collect();
            let a = normalize(&OneDModel::from_weights(&v));
            let b = normalize(&OneDModel::from_weights(&scaled));
            prop_assert_eq!(a.weights(), b.weights());
            prop_assert_eq!(
                a.terminals.iter().map(|t| t.origin).collect::<Vec<_>>(),
                (0..v.len()).collect::<Vec<_>>()
            );
        }
    }
}
