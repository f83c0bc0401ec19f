use serde::Serialize;

use crate::error::{Error, Result};
use crate::stepset::{Step, StepSet};

/// A walk from the origin, stored as indices into its step multiset.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Walk {
    stepset: StepSet,
    step_indices: Vec<usize>,
}

impl Walk {
    /// Panics if an index is out of range for `stepset`.
    pub fn new(stepset: StepSet, step_indices: Vec<usize>) -> Self {
        assert!(
            step_indices.iter().all(|&i| i < stepset.len()),
            "step index out of range"
        );
        Walk { stepset, step_indices }
    }

    pub fn empty(stepset: StepSet) -> Self {
        Walk { stepset, step_indices: Vec::new() }
    }

    pub fn stepset(&self) -> &StepSet {
        &self.stepset
    }

    pub fn step_indices(&self) -> &[usize] {
        &self.step_indices
    }

    pub fn len(&self) -> usize {
        self.step_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.step_indices.is_empty()
    }

    pub fn steps(&self) -> impl Iterator<Item = Step> + '_ {
        self.step_indices.iter().map(|&i| self.stepset.get(i))
    }

    /// Lattice points visited, starting at `(0, 0)`; `len() + 1` entries.
    pub fn positions(&self) -> Vec<(i64, i64)> {
        let mut out = Vec::with_capacity(self.len() + 1);
        let (mut x, mut y) = (0i64, 0i64);
        out.push((0, 0));
        for s in self.steps() {
            x += s.dx;
            y += s.dy;
            out.push((x, y));
        }
        out
    }

    pub fn endpoint(&self) -> (i64, i64) {
        self.steps().fold((0, 0), |(x, y), s| (x + s.dx, y + s.dy))
    }

    /// `dx,dy;dx,dy;...`, empty for the empty walk.
    pub fn to_text(&self) -> String {
        let parts: Vec<String> = self.steps().map(|s| format!("{},{}", s.dx, s.dy)).collect();
        parts.join(";")
    }

    /// Inverse of [`Walk::to_text`]. A vector repeated in the multiset maps
    /// to its first occurrence.
    pub fn parse_text(stepset: &StepSet, text: &str) -> Result<Walk> {
        let text = text.trim();
        if text.is_empty() {
            return Ok(Walk::empty(stepset.clone()));
        }
        let mut idx = Vec::new();
        for tok in text.split(';') {
            let bad = |reason: &str| Error::Parse { token: tok.to_string(), reason: reason.into() };
            let (dx, dy) = tok.split_once(',').ok_or_else(|| bad("expected `dx,dy`"))?;
            let dx: i64 = dx.trim().parse().map_err(|_| bad("bad integer"))?;
            let dy: i64 = dy.trim().parse().map_err(|_| bad("bad integer"))?;
            let k = stepset
                .steps()
                .iter()
                .position(|s| s.dx == dx && s.dy == dy)
                .ok_or_else(|| bad("not a step of the model"))?;
            idx.push(k);
        }
        Ok(Walk::new(stepset.clone(), idx))
    }

    pub fn to_json(&self) -> WalkJson {
        WalkJson {
            steps: self.steps().map(|s| (s.dx, s.dy)).collect(),
            step_indices: self.step_indices.clone(),
            positions: self.positions(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WalkJson {
    pub steps: Vec<(i64, i64)>,
    pub step_indices: Vec<usize>,
    pub positions: Vec<(i64, i64)>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positions_follow_steps() {
        let s = StepSet::parse("1,0;0,1;-1,-1").unwrap();
        let w = Walk::new(s.clone(), vec![0, 1, 2]);
        assert_eq!(w.positions(), vec![(0, 0), (1, 0), (1, 1), (0, 0)]);
        assert_eq!(w.to_text(), "1,0;0,1;-1,-1");
        assert_eq!(Walk::parse_text(&s, "1,0;0,1;-1,-1").unwrap(), w);
        assert!(Walk::parse_text(&s, "1,1").is_err());
        assert_eq!(Walk::empty(s).positions(), vec![(0, 0)]);
    }
}
