//! Word sampling from floating-point counts with an exact correction.
//!
//! Counts are kept as `f64` values of `N(m) tau^m`, every terminal
//! weighing `tau`. At a node of length `m` with options of (exact) weights
//! `w_k` and stored total `c`, option `k` is taken with probability exactly
//! `kappa w_k / c` and the trial is rejected otherwise. Rounding analysis
//! guarantees `kappa * sum(w_k) <= c`. Along a derivation the products
//! telescope to `kappa^N tau^n / c_root`, where `N` is the number of such
//! nodes; a final coin of probability `kappa^(N_max - N)` makes the
//! acceptance probability of every word of length `n` the same. The
//! decisions compare a lazily refined uniform real against exact values,
//! using floating-point bounds first and rationals only when those are
//! inconclusive.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;

use super::compiled::boustrophedon;
use super::{Compiled, Derivation, Grammar, Node, Nonterminal};
use crate::error::{Error, Result};

const U: f64 = f64::EPSILON / 2.0;
const TWO_M64: f64 = 1.0 / 18446744073709551616.0;
/// Nonzero counts must lie in `[2^-LIMIT, 2^LIMIT]` so that products of
/// two of them are normal numbers.
const RANGE_LIMIT: i32 = 500;

#[derive(Debug, Clone)]
pub struct GuidedCounts {
    compiled: Compiled,
    table: Vec<Vec<f64>>,
    n_max: usize,
    tau: f64,
    /// `kappa = 1 - kappa_k 2^-52`.
    kappa_k: u64,
}

impl GuidedCounts {
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Weight of one terminal.
    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn kappa(&self) -> f64 {
        1.0 - self.kappa_k as f64 * f64::EPSILON
    }

    /// `ln` of the number of words of `nt` of length `n`, from the scaled
    /// value.
    pub fn ln_count(&self, nt: Nonterminal, n: usize) -> Option<f64> {
        let id = self.compiled.root(nt)?;
        let v = *self.table[id].get(n)?;
        Some(v.ln() - n as f64 * self.tau.ln())
    }

    /// Bound on the number of randomized choices in one derivation of
    /// length `n`.
    fn choice_bound(&self, n: usize) -> u64 {
        if n == 0 {
            0
        } else {
            (2 * n as u64 - 1) * self.compiled.chain_bound() as u64
        }
    }
}

/// Scaled floating-point counts up to length `n_max`, with `tau` the
/// inverse exponential growth of the model's nonnegative walks.
pub fn guided_counts(g: &Grammar, n_max: usize) -> Result<GuidedCounts> {
    let growth = g.model.growth();
    if !(growth.is_finite() && growth > 0.0) {
        return Err(Error::Numeric(format!("growth {growth} of the projected model")));
    }
    let tau = 1.0 / growth;
    let compiled = Compiled::new(g)?;
    let nn = compiled.nodes.len();
    let mut table: Vec<Vec<f64>> = vec![Vec::with_capacity(n_max + 1); nn];
    let mut max_terms = 1usize;
    for m in 0..=n_max {
        for &id in &compiled.order {
            let v = match &compiled.nodes[id] {
                Node::Eps => f64::from(u8::from(m == 0)),
                Node::Term(_) => {
                    if m == 1 {
                        tau
                    } else {
                        0.0
                    }
                }
                Node::Alt(ch) => {
                    max_terms = max_terms.max(ch.len());
                    ch.iter().map(|&c| table[c][m]).sum()
                }
                Node::Seq(b, c) => match compiled.split_range(*b, *c, m) {
                    None => 0.0,
                    Some((lo, hi)) => {
                        max_terms = max_terms.max(hi - lo + 1);
                        dot_reversed(&table[*b][lo..=hi], &table[*c][m - hi..=m - lo])
                    }
                },
            };
            table[id].push(v);
        }
    }
    for (id, col) in table.iter().enumerate() {
        if col[0] != 0.0 && col[0] != 1.0 {
            return Err(Error::Domain(format!("node {id} derives the empty word ambiguously")));
        }
        for (m, &v) in col.iter().enumerate() {
            if v != 0.0 && !(v.is_finite() && v.abs().log2().abs() < RANGE_LIMIT as f64) {
                return Err(Error::Numeric(format!(
                    "scaled count {v:e} at length {m} is outside the safe floating-point range"
                )));
            }
        }
    }
    let kappa_k = max_terms as u64 + 2;
    Ok(GuidedCounts { compiled, table, n_max, tau, kappa_k })
}

/// `sum a[i] b[len - 1 - i]` with four partial sums.
fn dot_reversed(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    let mut acc = [0.0f64; 4];
    let mut i = 0;
    while i + 4 <= n {
        for k in 0..4 {
            acc[k] += a[i + k] * b[n - 1 - i - k];
        }
        i += 4;
    }
    let mut tail = 0.0;
    while i < n {
        tail += a[i] * b[n - 1 - i];
        i += 1;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Leftmost derivation of a word of length `n` from `nt`. Terminals are
/// handed to `emit`; a complete derivation is returned only after the
/// final correction coin, so that `Complete` words are exactly uniform.
pub fn derive_guided<R, F>(
    gc: &GuidedCounts,
    nt: Nonterminal,
    n: usize,
    rng: &mut R,
    mut emit: F,
) -> Result<Derivation>
where
    R: Rng + ?Sized,
    F: FnMut(usize) -> bool,
{
    let c = &gc.compiled;
    let root = c
        .root(nt)
        .ok_or_else(|| Error::Argument(format!("nonterminal {nt} is not in the grammar")))?;
    if n > gc.n_max {
        return Err(Error::Argument(format!("word length {n} exceeds counted length {}", gc.n_max)));
    }
    let t = &gc.table;
    if t[root][n] == 0.0 {
        return Err(Error::NoWalk { n });
    }
    let kappa = Kappa::new(gc.kappa_k);
    let mut choices = 0u64;
    let mut stack = vec![(root, n)];
    while let Some((id, m)) = stack.pop() {
        match &c.nodes[id] {
            Node::Eps => {}
            Node::Term(k) => {
                if !emit(*k) {
                    return Ok(Derivation::Aborted);
                }
            }
            Node::Alt(ch) => {
                if m == 0 {
                    let &k = ch.iter().find(|&&k| t[k][0] == 1.0).expect("nullable child");
                    stack.push((k, 0));
                    continue;
                }
                choices += 1;
                let opts = || ch.iter().map(|&k| (t[k][m], 1.0));
                match choose(rng, t[id][m], &kappa, opts) {
                    Some(pos) => stack.push((ch[pos], m)),
                    None => return Ok(Derivation::Rejected),
                }
            }
            Node::Seq(b, cc) => {
                let (lo, hi) = c.split_range(*b, *cc, m).expect("nonzero count has a split");
                if m == 0 {
                    stack.push((*cc, 0));
                    stack.push((*b, 0));
                    continue;
                }
                choices += 1;
                let opts = || boustrophedon(lo, hi).map(|i| (t[*b][i], t[*cc][m - i]));
                match choose(rng, t[id][m], &kappa, opts) {
                    Some(pos) => {
                        let i = boustrophedon(lo, hi).nth(pos).expect("position in range");
                        stack.push((*cc, m - i));
                        stack.push((*b, i));
                    }
                    None => return Ok(Derivation::Rejected),
                }
            }
        }
    }
    let bound = gc.choice_bound(n);
    debug_assert!(choices <= bound);
    for _ in choices..bound {
        if rng.gen::<u64>() >= kappa.threshold {
            return Ok(Derivation::Rejected);
        }
    }
    Ok(Derivation::Complete)
}

struct Kappa {
    value: f64,
    exact: BigRational,
    /// A uniform `u64` below this is a success of probability `kappa`.
    threshold: u64,
}

impl Kappa {
    fn new(k: u64) -> Self {
        assert!(k < 1 << 40, "too many terms for the rounding bound");
        let num = (1u64 << 52) - k;
        Kappa {
            value: num as f64 / (1u64 << 52) as f64,
            exact: BigRational::new(BigInt::from(num), BigInt::from(1u64 << 52)),
            threshold: num << 12,
        }
    }
}

/// Index `k` with probability `kappa w_k / total` where `w_k = x_k y_k`
/// exactly, or `None` with the remaining probability. Requires
/// `kappa * sum(w_k) <= total`.
fn choose<R, I, F>(rng: &mut R, total: f64, kappa: &Kappa, opts: F) -> Option<usize>
where
    R: Rng + ?Sized,
    I: Iterator<Item = (f64, f64)>,
    F: Fn() -> I,
{
    // Target t = U total / kappa for a uniform real U in [b, b + 1) 2^-64.
    let b: u64 = rng.gen();
    let scale = total / kappa.value;
    let tl = (b as f64) * TWO_M64 * scale * (1.0 - 8.0 * U);
    let th = ((b as f64) + 1.0) * TWO_M64 * scale * (1.0 + 8.0 * U);
    let mut s = 0.0f64;
    for (k, (x, y)) in opts().enumerate() {
        s += x * y;
        let err = s * (k as f64 + 3.0) * 4.0 * U;
        if th <= s - err {
            return Some(k);
        }
        if tl < s + err {
            return choose_exact(rng, b, total, kappa, opts);
        }
    }
    None
}

fn choose_exact<R, I, F>(rng: &mut R, b: u64, total: f64, kappa: &Kappa, opts: F) -> Option<usize>
where
    R: Rng + ?Sized,
    I: Iterator<Item = (f64, f64)>,
    F: Fn() -> I,
{
    let exact = |v: f64| BigRational::from_float(v).expect("finite count");
    let mut cum = Vec::new();
    let mut acc = BigRational::zero();
    for (x, y) in opts() {
        acc += exact(x) * exact(y);
        cum.push(acc.clone());
    }
    let scale = exact(total) / &kappa.exact;
    let mut num = BigUint::from(b);
    let mut bits = 64u32;
    loop {
        let den = BigInt::one() << bits;
        let lo = BigRational::new(BigInt::from(num.clone()), den.clone()) * &scale;
        let hi = BigRational::new(BigInt::from(num.clone()) + 1, den) * &scale;
        let k = cum.partition_point(|s| *s <= lo);
        if k == cum.len() {
            return None;
        }
        if hi <= cum[k] {
            return Some(k);
        }
        num = (num << 64u32) + BigUint::from(rng.gen::<u64>());
        bits += 64;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::{build_grammar, count_words, oned_counts, OneDFinal};
    use crate::projection::OneDModel;
    use num_traits::ToPrimitive;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    use std::collections::HashMap;

    fn grammar(w: &[i64]) -> Grammar {
        build_grammar(&OneDModel::from_weights(w)).unwrap()
    }

    #[test]
    fn scaled_counts_track_exact_counts() {
        let w = [2, -1, -1, -2];
        let g = grammar(&w);
        let gc = guided_counts(&g, 300).unwrap();
        let exact = oned_counts(&g.model, 300, OneDFinal::Any);
        for n in [0, 1, 10, 100, 300] {
            let want = crate::enumerate::ln_biguint(&exact.values[n]);
            let got = gc.ln_count(Nonterminal::P, n).unwrap();
            assert!((want - got).abs() < 1e-9 * (1.0 + want), "{n} {want} {got}");
        }
        assert!(gc.kappa() < 1.0 && gc.kappa() > 1.0 - 1e-12);
    }

    #[test]
    fn exact_and_fast_paths_agree() {
        let opts = || [(0.5, 0.25), (0.25, 0.5), (1.0, 0.125)].into_iter();
        let kappa = Kappa::new(4);
        let total = 0.375;
        for seed in 0..300 {
            let mut r1 = ChaCha8Rng::seed_from_u64(seed);
            let mut r2 = ChaCha8Rng::seed_from_u64(seed);
            let fast = choose(&mut r1, total, &kappa, opts);
            let b: u64 = r2.gen();
            assert_eq!(fast, choose_exact(&mut r2, b, total, &kappa, opts));
        }
    }

    #[test]
    fn exact_path_refines_at_boundaries() {
        // Target lands exactly on the first cumulative sum: needs more bits.
        let kappa = Kappa::new(0);
        let opts = || [(0.5, 1.0), (0.5, 1.0)].into_iter();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pick = choose_exact(&mut rng, 1u64 << 63, 1.0, &kappa, opts);
        assert_eq!(pick, Some(1));
        let pick = choose_exact(&mut rng, (1u64 << 63) - 1, 1.0, &kappa, opts);
        assert_eq!(pick, Some(0));
    }

    #[test]
    fn uniform_over_small_words() {
        let w = [2, -1, -1, -2];
        let g = grammar(&w);
        let gc = guided_counts(&g, 6).unwrap();
        let exact = count_words(&g, 6).unwrap();
        let total = exact.get(Nonterminal::P, 6).unwrap().to_usize().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut seen: HashMap<Vec<usize>, usize> = HashMap::new();
        let draws = 200 * total;
        let mut got = 0;
        while got < draws {
            let mut word = Vec::new();
            let d = derive_guided(&gc, Nonterminal::P, 6, &mut rng, |k| {
                word.push(k);
                true
            })
            .unwrap();
            if d == Derivation::Complete {
                *seen.entry(word).or_default() += 1;
                got += 1;
            }
        }
        assert_eq!(seen.len(), total);
        let e = draws as f64 / total as f64;
        let chi: f64 = seen.values().map(|&o| (o as f64 - e).powi(2) / e).sum();
        let q = ChiSquared::new((total - 1) as f64).unwrap().inverse_cdf(0.999);
        assert!(chi < q, "{chi} {q}");
    }

    #[test]
    fn rejects_out_of_range_counts() {
        // Positive drift: excursions decay exponentially against tau^m.
        let g = grammar(&[5, 5, 5, -1]);
        assert!(matches!(guided_counts(&g, 5000), Err(Error::Numeric(_))));
    }
}
