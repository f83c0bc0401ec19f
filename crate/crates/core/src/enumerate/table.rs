use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, Zero};
use rand::Rng;

use super::Walk;
use crate::error::{Error, Result};
use crate::stepset::StepSet;

/// Default memory budget for the full suffix table, in bytes.
pub const DEFAULT_MEM_BUDGET: u128 = 1 << 30;

/// `counts(n', x, y)`: number of quadrant walks of length `n'` from `(x, y)`.
///
/// Layer `n'` is only stored where a sampler of length `n_max` can be with
/// `n'` steps left, i.e. `x <= (n_max - n') a` and `y <= (n_max - n') b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTable {
    stepset: StepSet,
    n_max: usize,
    a: usize,
    b: usize,
    layers: Vec<Vec<BigUint>>,
}

impl CountTable {
    pub fn stepset(&self) -> &StepSet {
        &self.stepset
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// `(a, b)`: largest upward x and y steps.
    pub fn extent(&self) -> (usize, usize) {
        (self.a, self.b)
    }

    pub fn layer_dims(&self, rem: usize) -> (usize, usize) {
        layer_dims(self.n_max, self.a, self.b, rem)
    }

    /// Row-major (`y` outer, `x` inner) values of layer `rem`.
    pub fn layer(&self, rem: usize) -> &[BigUint] {
        &self.layers[rem]
    }

    pub fn get(&self, rem: usize, x: usize, y: usize) -> Option<&BigUint> {
        let (wd, ht) = self.layer_dims(rem);
        (x < wd && y < ht).then(|| &self.layers[rem][y * wd + x])
    }

    /// Number of quadrant walks of length `n_max`.
    pub fn q_n(&self) -> &BigUint {
        &self.layers[self.n_max][0]
    }

    /// Rebuilds a table from stored layers, checking shapes and that layer
    /// zero is all ones.
    pub fn from_layers(stepset: StepSet, n_max: usize, layers: Vec<Vec<BigUint>>) -> Result<Self> {
        let (a, b) = stepset.max_up();
        let (a, b) = (a as usize, b as usize);
        if layers.len() != n_max + 1 {
            return Err(Error::Cache(format!(
                "expected {} layers, found {}",
                n_max + 1,
                layers.len()
            )));
        }
        for (rem, layer) in layers.iter().enumerate() {
            let (wd, ht) = layer_dims(n_max, a, b, rem);
            if layer.len() != wd * ht {
                return Err(Error::Cache(format!(
                    "layer {rem} has {} entries, expected {}",
                    layer.len(),
                    wd * ht
                )));
            }
        }
        if !layers[0].iter().all(|v| v.is_one()) {
            return Err(Error::Cache("layer 0 is not all ones".into()));
        }
        Ok(CountTable { stepset, n_max, a, b, layers })
    }
}

fn layer_dims(n_max: usize, a: usize, b: usize, rem: usize) -> (usize, usize) {
    ((n_max - rem) * a + 1, (n_max - rem) * b + 1)
}

/// Rough heap footprint of the table: one `BigUint` header per entry plus
/// its digits, bounded by `|S|^rem`.
pub fn table_bytes(s: &StepSet, n: usize) -> u128 {
    let (a, b) = s.max_up();
    let (a, b) = (a as u128, b as u128);
    let bits_per_step = (s.len() as f64).log2().max(0.0);
    let mut total = 0u128;
    for rem in 0..=n {
        let k = (n - rem) as u128;
        let cells = (k * a + 1) * (k * b + 1);
        let words = ((rem as f64 * bits_per_step) / 64.0).ceil() as u128 + 1;
        total += cells * (24 + 8 * words);
    }
    total
}

/// Full suffix table for walks of length `n`, refusing to exceed `budget`
/// bytes.
pub fn suffix_counts(s: &StepSet, n: usize, budget: u128) -> Result<CountTable> {
    let needed = table_bytes(s, n);
    if needed > budget {
        return Err(Error::MemoryBudget { needed, budget });
    }
    let (a, b) = s.max_up();
    let (a, b) = (a as usize, b as usize);
    let mut layers: Vec<Vec<BigUint>> = Vec::with_capacity(n + 1);
    let (w0, h0) = layer_dims(n, a, b, 0);
    layers.push(vec![BigUint::one(); w0 * h0]);
    for rem in 1..=n {
        let (wd, ht) = layer_dims(n, a, b, rem);
        let (pw, ph) = layer_dims(n, a, b, rem - 1);
        let prev = &layers[rem - 1];
        let mut layer = Vec::with_capacity(wd * ht);
        for y in 0..ht {
            for x in 0..wd {
                let mut v = BigUint::zero();
                for st in s.steps() {
                    let (nx, ny) = (x as i64 + st.dx, y as i64 + st.dy);
                    if nx >= 0 && ny >= 0 && (nx as usize) < pw && (ny as usize) < ph {
                        v += &prev[ny as usize * pw + nx as usize];
                    }
                }
                layer.push(v);
            }
        }
        layers.push(layer);
    }
    Ok(CountTable { stepset: s.clone(), n_max: n, a, b, layers })
}

/// Uniform quadrant walk of length `table.n_max()` by the recursive method.
pub fn sample_recursive<R: Rng + ?Sized>(table: &CountTable, rng: &mut R) -> Result<Walk> {
    sample_inner(table, rng, None)
}

/// As [`sample_recursive`], also returning each choice's probability as a
/// `(numerator, denominator)` pair.
pub fn sample_recursive_traced<R: Rng + ?Sized>(
    table: &CountTable,
    rng: &mut R,
) -> Result<(Walk, Vec<(BigUint, BigUint)>)> {
    let mut trace = Vec::with_capacity(table.n_max);
    let walk = sample_inner(table, rng, Some(&mut trace))?;
    Ok((walk, trace))
}

fn sample_inner<R: Rng + ?Sized>(
    table: &CountTable,
    rng: &mut R,
    mut trace: Option<&mut Vec<(BigUint, BigUint)>>,
) -> Result<Walk> {
    let n = table.n_max;
    if table.q_n().is_zero() {
        return Err(Error::NoWalk { n });
    }
    let s = &table.stepset;
    let (mut x, mut y) = (0usize, 0usize);
    let mut indices = Vec::with_capacity(n);
    for rem in (1..=n).rev() {
        let total = table.get(rem, x, y).expect("position inside table");
        let mut r = rng.gen_biguint_below(total);
        let mut chosen = None;
        for (i, st) in s.steps().iter().enumerate() {
            let (nx, ny) = (x as i64 + st.dx, y as i64 + st.dy);
            if nx < 0 || ny < 0 {
                continue;
            }
            let c = table
                .get(rem - 1, nx as usize, ny as usize)
                .expect("successor inside table");
            if &r < c {
                chosen = Some((i, nx as usize, ny as usize, c.clone()));
                break;
            }
            r -= c;
        }
        let (i, nx, ny, c) = chosen.expect("cumulative counts cover the total");
        if let Some(t) = trace.as_deref_mut() {
            t.push((c, total.clone()));
        }
        indices.push(i);
        x = nx;
        y = ny;
    }
    Ok(Walk::new(s.clone(), indices))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::{brute_force_walks, quadrant_counts, Endpoint, Region};
    use crate::stepset::presets;
    use num_rational::BigRational;
    use num_bigint::BigInt;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const BIG: u128 = 1 << 34;

    #[test]
    fn small_tables() {
        let t = suffix_counts(&presets::reluctant_six(), 2, BIG).unwrap();
        assert_eq!(*t.q_n(), BigUint::from(6u32));
        assert_eq!(*t.get(1, 0, 0).unwrap(), BigUint::from(2u32));
        let t = suffix_counts(&presets::symmetric_reluctant(), 2, BIG).unwrap();
        assert_eq!(*t.q_n(), BigUint::from(4u32));
        assert_eq!(*t.get(1, 0, 0).unwrap(), BigUint::from(1u32));
        let t = suffix_counts(&presets::simple(), 0, BIG).unwrap();
        assert_eq!(*t.q_n(), BigUint::one());
    }

    #[test]
    fn table_matches_brute_force_everywhere() {
        for text in [presets::RELUCTANT_SIX, presets::SIMPLE, presets::SYMMETRIC_RELUCTANT] {
            let s = StepSet::parse(text).unwrap();
            let n = 6;
            let t = suffix_counts(&s, n, BIG).unwrap();
            for rem in 0..=n {
                let (wd, ht) = t.layer_dims(rem);
                for y in 0..ht {
                    for x in 0..wd {
                        let brute = brute_from(&s, rem, x as i64, y as i64);
                        assert_eq!(t.get(rem, x, y).unwrap(), &BigUint::from(brute), "{text} {rem} {x} {y}");
                    }
                }
            }
        }
    }

    fn brute_from(s: &StepSet, n: usize, x: i64, y: i64) -> u64 {
        if n == 0 {
            return 1;
        }
        s.steps()
            .iter()
            .filter(|st| x + st.dx >= 0 && y + st.dy >= 0)
            .map(|st| brute_from(s, n - 1, x + st.dx, y + st.dy))
            .sum()
    }

    #[test]
    fn table_agrees_with_series() {
        let s = presets::reluctant_six();
        let series = quadrant_counts(&s, 40, Endpoint::Any);
        for n in [0, 1, 7, 19, 40] {
            let t = suffix_counts(&s, n, BIG).unwrap();
            assert_eq!(t.q_n(), &series.values[n]);
        }
    }

    #[test]
    fn budget_is_enforced() {
        let err = suffix_counts(&presets::reluctant_six(), 400, 1 << 20).unwrap_err();
        assert!(matches!(err, Error::MemoryBudget { budget, .. } if budget == 1 << 20));
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn trivial_model_has_no_walk() {
        let t = suffix_counts(&StepSet::parse("-1,0;0,-1").unwrap(), 3, BIG).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(sample_recursive(&t, &mut rng), Err(Error::NoWalk { n: 3 })));
    }

    #[test]
    fn empty_and_length_one() {
        let s = presets::reluctant_six();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t0 = suffix_counts(&s, 0, BIG).unwrap();
        assert!(sample_recursive(&t0, &mut rng).unwrap().is_empty());
        let t1 = suffix_counts(&s, 1, BIG).unwrap();
        let mut seen = [0usize; 2];
        for _ in 0..4000 {
            let w = sample_recursive(&t1, &mut rng).unwrap();
            seen[w.step_indices()[0]] += 1;
        }
        assert!(seen[0] > 1800 && seen[1] > 1800, "{seen:?}");
    }

    #[test]
    fn choice_probabilities_multiply_to_one_over_q() {
        let s = presets::reluctant_six();
        let t = suffix_counts(&s, 8, BIG).unwrap();
        let q = BigInt::from(t.q_n().clone());
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let (w, trace) = sample_recursive_traced(&t, &mut rng).unwrap();
            let mut p = BigRational::from_integer(BigInt::from(1));
            for (num, den) in trace {
                p *= BigRational::new(BigInt::from(num), BigInt::from(den));
            }
            assert_eq!(p, BigRational::new(BigInt::from(1), q.clone()));
            assert!(w.positions().iter().all(|&(x, y)| x >= 0 && y >= 0));
        }
        assert_eq!(
            brute_force_walks(&s, 8, Region::Quadrant).unwrap().len(),
            t.q_n().to_string().parse::<usize>().unwrap()
        );
    }
}
