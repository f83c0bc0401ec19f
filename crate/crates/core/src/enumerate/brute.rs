use super::Walk;
use crate::error::{Error, Result};
use crate::stepset::StepSet;

/// Largest length accepted by [`brute_force_walks`].
pub const BRUTE_FORCE_LIMIT: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Quadrant,
    /// `x p + y q >= 0`.
    HalfPlane { p: i64, q: i64 },
}

impl Region {
    pub fn contains(self, x: i64, y: i64) -> bool {
        match self {
            Region::Quadrant => x >= 0 && y >= 0,
            Region::HalfPlane { p, q } => x * p + y * q >= 0,
        }
    }
}

/// Every walk of length `n` staying in `region`, in lexicographic order of
/// step indices.
pub fn brute_force_walks(s: &StepSet, n: usize, region: Region) -> Result<Vec<Walk>> {
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::Refused { n, limit: BRUTE_FORCE_LIMIT });
    }
    let mut out = Vec::new();
    let mut stack = Vec::with_capacity(n);
    dfs(s, n, region, (0, 0), &mut stack, &mut out);
    Ok(out)
}

fn dfs(
    s: &StepSet,
    n: usize,
    region: Region,
    pos: (i64, i64),
    stack: &mut Vec<usize>,
    out: &mut Vec<Walk>,
) {
    if stack.len() == n {
        out.push(Walk::new(s.clone(), stack.clone()));
        return;
    }
    for (i, st) in s.steps().iter().enumerate() {
        let next = (pos.0 + st.dx, pos.1 + st.dy);
        if region.contains(next.0, next.1) {
            stack.push(i);
            dfs(s, n, region, next, stack, out);
            stack.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stepset::presets;

    #[test]
    fn small_cases() {
        let w = brute_force_walks(&presets::reluctant_six(), 1, Region::Quadrant).unwrap();
        let texts: Vec<_> = w.iter().map(|w| w.to_text()).collect();
        assert_eq!(texts, vec!["1,0", "0,1"]);
        let w = brute_force_walks(&presets::simple(), 0, Region::Quadrant).unwrap();
        assert_eq!(w.len(), 1);
        assert!(w[0].is_empty());
        assert_eq!(brute_force_walks(&presets::simple(), 2, Region::Quadrant).unwrap().len(), 6);
        assert!(matches!(
            brute_force_walks(&presets::simple(), 13, Region::Quadrant),
            Err(Error::Refused { n: 13, .. })
        ));
    }

    #[test]
    fn sorted_and_in_region() {
        let s = presets::symmetric_reluctant();
        let walks = brute_force_walks(&s, 7, Region::HalfPlane { p: 1, q: 1 }).unwrap();
        assert!(walks.windows(2).all(|p| p[0].step_indices() < p[1].step_indices()));
        for w in &walks {
            assert!(w.positions().iter().all(|&(x, y)| x + y >= 0));
        }
    }
}
