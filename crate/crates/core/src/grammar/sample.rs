use num_bigint::RandBigInt;
use num_traits::{One, Zero};
use rand::Rng;

use super::compiled::boustrophedon;
use super::{Node, Nonterminal, WordCounts};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Derivation {
    Complete,
    /// The callback asked to stop before the word was finished.
    Aborted,
    /// Turned down by the exactness correction of the guided sampler.
    Rejected,
}

/// Uniform word of length `n` derived from `nt`, as indices into the
/// model's terminals.
pub fn sample_word<R: Rng + ?Sized>(
    counts: &WordCounts,
    nt: Nonterminal,
    n: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let mut word = Vec::with_capacity(n);
    derive_word(counts, nt, n, rng, |t| {
        word.push(t);
        true
    })?;
    Ok(word)
}

/// Leftmost derivation of a uniform word, handing terminals to `emit` in
/// order; `emit` returning false stops the derivation early.
pub fn derive_word<R, F>(counts: &WordCounts, nt: Nonterminal, n: usize, rng: &mut R, mut emit: F) -> Result<Derivation>
where
    R: Rng + ?Sized,
    F: FnMut(usize) -> bool,
{
    let c = &counts.compiled;
    let root = c
        .root(nt)
        .ok_or_else(|| Error::Argument(format!("nonterminal {nt} is not in the grammar")))?;
    if n > counts.n_max() {
        return Err(Error::Argument(format!(
            "word length {n} exceeds counted length {}",
            counts.n_max()
        )));
    }
    let t = &counts.table;
    if t[root][n].is_zero() {
        return Err(Error::NoWalk { n });
    }
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
                    let &k = ch.iter().find(|&&k| t[k][0].is_one()).expect("nullable child");
                    stack.push((k, 0));
                    continue;
                }
                let mut r = rng.gen_biguint_below(&t[id][m]);
                for &k in ch {
                    let v = &t[k][m];
                    if &r < v {
                        stack.push((k, m));
                        break;
                    }
                    r -= v;
                }
            }
            Node::Seq(b, cc) => {
                let (lo, hi) = c.split_range(*b, *cc, m).expect("nonzero count has a split");
                if m == 0 {
                    stack.push((*cc, 0));
                    stack.push((*b, 0));
                    continue;
                }
                let mut r = rng.gen_biguint_below(&t[id][m]);
                for i in boustrophedon(lo, hi) {
                    let (x, y) = (&t[*b][i], &t[*cc][m - i]);
                    if x.is_zero() || y.is_zero() {
                        continue;
                    }
                    let v = x * y;
                    if r < v {
                        stack.push((*cc, m - i));
                        stack.push((*b, i));
                        break;
                    }
                    r -= v;
                }
            }
        }
    }
    Ok(Derivation::Complete)
}
