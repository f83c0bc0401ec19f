//! Step sets: parsing, canonical formatting, drift and the inventory
//! polynomial `S(x, y) = sum over steps of x^dx * y^dy`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

/// Default bound on `|dx|` and `|dy|` accepted by the parser.
pub const DEFAULT_COORD_BOUND: i64 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Step {
    pub dx: i64,
    pub dy: i64,
}

impl Step {
    pub const fn new(dx: i64, dy: i64) -> Self {
        Step { dx, dy }
    }

    pub fn transpose(self) -> Self {
        Step { dx: self.dy, dy: self.dx }
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.dx, self.dy)
    }
}

/// An ordered multiset of steps. Duplicates are kept as distinct elements:
/// the element index is the identity used by counting and sampling.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StepSet {
    steps: Vec<Step>,
}

impl StepSet {
    pub fn new(steps: Vec<Step>) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::Parse {
                token: String::new(),
                reason: "a step set needs at least one step".into(),
            });
        }
        Ok(StepSet { steps })
    }

    pub fn from_pairs(pairs: &[(i64, i64)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(dx, dy)| Step::new(dx, dy)).collect())
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with_bound(text, DEFAULT_COORD_BOUND)
    }

    /// Parses `"dx,dy;dx,dy;..."`, each pair optionally wrapped in
    /// parentheses, rejecting coordinates with absolute value above `bound`.
    pub fn parse_with_bound(text: &str, bound: i64) -> Result<Self> {
        if text.trim().is_empty() {
            return Err(Error::Parse {
                token: text.to_string(),
                reason: "empty step set".into(),
            });
        }
        let mut steps = Vec::new();
        for token in text.split(';') {
            let trimmed = token.trim();
            let inner = match (trimmed.strip_prefix('('), trimmed.strip_suffix(')')) {
                (Some(_), Some(_)) => &trimmed[1..trimmed.len() - 1],
                (None, None) => trimmed,
                _ => {
                    return Err(Error::Parse {
                        token: trimmed.to_string(),
                        reason: "unbalanced parentheses".into(),
                    })
                }
            };
            let mut parts = inner.split(',');
            let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::Parse {
                    token: trimmed.to_string(),
                    reason: "expected a pair `dx,dy`".into(),
                });
            };
            let parse_coord = |s: &str| {
                s.trim().parse::<i64>().map_err(|_| Error::Parse {
                    token: trimmed.to_string(),
                    reason: format!("`{}` is not an integer", s.trim()),
                })
            };
            let (dx, dy) = (parse_coord(a)?, parse_coord(b)?);
            if dx.abs() > bound || dy.abs() > bound {
                return Err(Error::Parse {
                    token: trimmed.to_string(),
                    reason: format!("coordinate exceeds bound {bound}"),
                });
            }
            steps.push(Step::new(dx, dy));
        }
        Self::new(steps)
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn get(&self, index: usize) -> Step {
        self.steps[index]
    }

    /// Coordinate-wise sum over the multiset.
    pub fn drift(&self) -> (i64, i64) {
        self.steps
            .iter()
            .fold((0, 0), |(x, y), s| (x + s.dx, y + s.dy))
    }

    pub fn transpose(&self) -> StepSet {
        StepSet {
            steps: self.steps.iter().map(|s| s.transpose()).collect(),
        }
    }

    /// True when the multiset is invariant under `(i, j) -> (j, i)`.
    pub fn is_transpose_symmetric(&self) -> bool {
        let mut a = self.steps.clone();
        let mut b: Vec<Step> = self.steps.iter().map(|s| s.transpose()).collect();
        a.sort();
        b.sort();
        a == b
    }

    /// Largest positive x and y displacement (`a`, `b`), zero if none.
    pub fn max_up(&self) -> (i64, i64) {
        let a = self.steps.iter().map(|s| s.dx).max().unwrap_or(0).max(0);
        let b = self.steps.iter().map(|s| s.dy).max().unwrap_or(0).max(0);
        (a, b)
    }

    /// Largest negative x and y displacement, as positive numbers.
    pub fn max_down(&self) -> (i64, i64) {
        let a = self.steps.iter().map(|s| -s.dx).max().unwrap_or(0).max(0);
        let b = self.steps.iter().map(|s| -s.dy).max().unwrap_or(0).max(0);
        (a, b)
    }

    /// Evaluates `S` and its first and second partial derivatives at a
    /// positive point.
    pub fn inventory_eval(&self, x: f64, y: f64) -> Result<InventoryEval> {
        if !(x > 0.0 && y > 0.0) || !x.is_finite() || !y.is_finite() {
            return Err(Error::Domain(format!(
                "inventory polynomial evaluated at non-positive point ({x}, {y})"
            )));
        }
        let mut e = InventoryEval::default();
        for s in &self.steps {
            let (i, j) = (s.dx as i32, s.dy as i32);
            let (fi, fj) = (i as f64, j as f64);
            let m = x.powi(i) * y.powi(j);
            e.value += m;
            e.grad.0 += fi * m / x;
            e.grad.1 += fj * m / y;
            e.hessian.0 += fi * (fi - 1.0) * m / (x * x);
            e.hessian.1 += fi * fj * m / (x * y);
            e.hessian.2 += fj * (fj - 1.0) * m / (y * y);
        }
        Ok(e)
    }
}

impl fmt::Display for StepSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, s) in self.steps.iter().enumerate() {
            if k > 0 {
                f.write_str(";")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl FromStr for StepSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StepSet::parse(s)
    }
}

/// `S`, its gradient `(S_x, S_y)` and Hessian entries `(S_xx, S_xy, S_yy)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct InventoryEval {
    pub value: f64,
    pub grad: (f64, f64),
    pub hessian: (f64, f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub drift: (i64, i64),
    pub reluctant: bool,
    pub singular: bool,
    pub trivial: bool,
}

/// Horizon used when probing for triviality.
pub const DEFAULT_TRIVIALITY_HORIZON: usize = 50;

/// Reluctance from the drift signs, singularity from the critical-point
/// test, triviality from exact counts up to `horizon` (zero counts are
/// absorbing, since every prefix of a walk is a walk).
pub fn classify(s: &StepSet, horizon: usize) -> Classification {
    let drift = s.drift();
    let horizon = horizon.max(1);
    let counts = crate::enumerate::quadrant_counts(s, horizon, crate::enumerate::Endpoint::Any);
    let trivial = counts.values.iter().any(|q| q.bits() == 0);
    Classification {
        drift,
        reluctant: drift.0 < 0 && drift.1 < 0,
        singular: !crate::slope::has_positive_critical_point(s),
        trivial,
    }
}

/// Step sets used throughout the docs, examples and tests.
pub mod presets {
    use super::StepSet;

    /// The six-step reluctant model `{(1,0),(0,1),(-1,0),(1,-1),(-1,-1),(-2,-1)}`.
    pub const RELUCTANT_SIX: &str = "(1,0);(0,1);(-1,0);(1,-1);(-1,-1);(-2,-1)";
    /// The simple walk `{N, E, S, W}`.
    pub const SIMPLE: &str = "(1,0);(0,1);(-1,0);(0,-1)";
    /// Transpose-symmetric reluctant model `{(1,1),(-1,0),(0,-1),(-1,-1)}`.
    pub const SYMMETRIC_RELUCTANT: &str = "(1,1);(-1,0);(0,-1);(-1,-1)";

    pub fn reluctant_six() -> StepSet {
        StepSet::parse(RELUCTANT_SIX).expect("preset parses")
    }

    pub fn simple() -> StepSet {
        StepSet::parse(SIMPLE).expect("preset parses")
    }

    pub fn symmetric_reluctant() -> StepSet {
        StepSet::parse(SYMMETRIC_RELUCTANT).expect("preset parses")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_parenthesized_and_bare_pairs() {
        let s = StepSet::parse("(1,0);(0,1);(-1,0);(1,-1);(-1,-1);(-2,-1)").unwrap();
        assert_eq!(s.len(), 6);
        assert_eq!(s.get(5), Step::new(-2, -1));

        let s = StepSet::parse("1,1;-1,0;0,-1;-1,-1").unwrap();
        assert_eq!(s.len(), 4);
        let s = StepSet::parse(" ( 1 , 1 ) ; -1,0 ").unwrap();
        assert_eq!(s.steps(), &[Step::new(1, 1), Step::new(-1, 0)]);
    }

    #[test]
    fn keeps_duplicates() {
        let s = StepSet::parse("1,1;1,1").unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.drift(), (2, 2));
    }

    #[test]
    fn parse_errors_name_the_token() {
        for (text, tok) in [("1,0;2", "2"), ("1,0;(3,x)", "(3,x)"), ("(1,0", "(1,0"), ("11,0", "11,0")] {
            match StepSet::parse(text) {
                Err(Error::Parse { token, .. }) => assert_eq!(token, tok, "{text}"),
                other => panic!("expected parse error for {text}, got {other:?}"),
            }
        }
        assert!(StepSet::parse("   ").is_err());
        assert!(StepSet::parse_with_bound("11,0", 11).is_ok());
    }

    #[test]
    fn drift_examples() {
        assert_eq!(presets::reluctant_six().drift(), (-2, -2));
        assert_eq!(presets::simple().drift(), (0, 0));
    }

    #[test]
    fn inventory_examples() {
        let e = presets::simple().inventory_eval(1.0, 1.0).unwrap();
        assert_eq!(e.value, 4.0);
        assert_eq!(e.grad, (0.0, 0.0));
        let e = StepSet::parse("1,1").unwrap().inventory_eval(2.0, 3.0).unwrap();
        assert_eq!(e.value, 6.0);
        assert_eq!(e.grad, (3.0, 2.0));
        assert_eq!(e.hessian, (0.0, 1.0, 0.0));
        assert!(presets::simple().inventory_eval(0.0, 1.0).is_err());
        assert!(presets::simple().inventory_eval(1.0, -2.0).is_err());
    }

    #[test]
    fn classify_examples() {
        let c = classify(&presets::reluctant_six(), DEFAULT_TRIVIALITY_HORIZON);
        assert!(c.reluctant && !c.trivial && !c.singular);
        let c = classify(&StepSet::parse("-1,0;0,-1").unwrap(), 10);
        assert!(c.trivial && c.reluctant);
        let c = classify(&presets::simple(), 10);
        assert!(!c.reluctant && !c.trivial);
    }

    fn arb_stepset() -> impl Strategy<Value = StepSet> {
        prop::collection::vec((-3i64..=3, -3i64..=3), 1..8)
            .prop_map(|v| StepSet::from_pairs(&v).unwrap())
    }

    proptest! {
        #[test]
        fn format_parse_round_trip(s in arb_stepset()) {
            let text = s.to_string();
            prop_assert!(!text.contains(' '));
            prop_assert_eq!(StepSet::parse(&text).unwrap(), s);
        }

        #[test]
        fn drift_is_additive_and_order_free(a in arb_stepset(), b in arb_stepset()) {
            let mut joined = a.steps().to_vec();
            joined.extend_from_slice(b.steps());
            let (da, db) = (a.drift(), b.drift());
            let mut reversed = joined.clone();
            reversed.reverse();
            let j = StepSet::new(joined).unwrap();
            prop_assert_eq!(j.drift(), (da.0 + db.0, da.1 + db.1));
            prop_assert_eq!(StepSet::new(reversed).unwrap().drift(), j.drift());
        }

        #[test]
        fn partials_match_finite_differences(s in arb_stepset(), x in 0.5f64..2.0, y in 0.5f64..2.0) {
            let h = 1e-5;
            let e = s.inventory_eval(x, y).unwrap();
            let f = |x: f64, y: f64| s.inventory_eval(x, y).unwrap();
            let close = |a: f64, b: f64| (a - b).abs() <= 1e-6 * a.abs().max(b.abs()).max(1.0);
            let sx = (f(x + h, y).value - f(x - h, y).value) / (2.0 * h);
            let sy = (f(x, y + h).value - f(x, y - h).value) / (2.0 * h);
            prop_assert!(close(e.grad.0, sx), "S_x {} vs {}", e.grad.0, sx);
            prop_assert!(close(e.grad.1, sy), "S_y {} vs {}", e.grad.1, sy);
            let sxx = (f(x + h, y).grad.0 - f(x - h, y).grad.0) / (2.0 * h);
            let sxy = (f(x, y + h).grad.0 - f(x, y - h).grad.0) / (2.0 * h);
            let syy = (f(x, y + h).grad.1 - f(x, y - h).grad.1) / (2.0 * h);
            prop_assert!(close(e.hessian.0, sxx));
            prop_assert!(close(e.hessian.1, sxy));
            prop_assert!(close(e.hessian.2, syy));
        }

        #[test]
        fn classification_is_transpose_invariant(s in arb_stepset()) {
            let c = classify(&s, 12);
            let t = classify(&s.transpose(), 12);
            prop_assert_eq!(t.drift, (c.drift.1, c.drift.0));
            prop_assert_eq!((t.reluctant, t.trivial, t.singular), (c.reluctant, c.trivial, c.singular));
        }
    }
}
