use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::{Compiled, Grammar, Node, Nonterminal};
use crate::enumerate::{CountSeries, Endpoint};
use crate::error::{Error, Result};
use crate::projection::OneDModel;

/// Exact number of words of each length `0..=n_max` for every nonterminal
/// (and every internal node of the binary form).
#[derive(Debug, Clone)]
pub struct WordCounts {
    pub(crate) compiled: Compiled,
    pub(crate) table: Vec<Vec<BigUint>>,
    n_max: usize,
}

impl WordCounts {
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn get(&self, nt: Nonterminal, n: usize) -> Option<&BigUint> {
        let id = self.compiled.root(nt)?;
        self.table[id].get(n)
    }

    /// Counts of `nt` by length.
    pub fn series(&self, nt: Nonterminal) -> Option<Vec<BigUint>> {
        let id = self.compiled.root(nt)?;
        Some(self.table[id].clone())
    }
}

/// Counts words of every nonterminal up to length `n_max` by convolution
/// over the binary form.
pub fn count_words(g: &Grammar, n_max: usize) -> Result<WordCounts> {
    let compiled = Compiled::new(g)?;
    let nn = compiled.nodes.len();
    let mut table: Vec<Vec<BigUint>> = vec![Vec::with_capacity(n_max + 1); nn];
    for m in 0..=n_max {
        for &id in &compiled.order {
            let v = match &compiled.nodes[id] {
                Node::Eps => {
                    if m == 0 {
                        BigUint::one()
                    } else {
                        BigUint::zero()
                    }
                }
                Node::Term(_) => {
                    if m == 1 {
                        BigUint::one()
                    } else {
                        BigUint::zero()
                    }
                }
                Node::Alt(ch) => {
                    let mut v = BigUint::zero();
                    for &c in ch {
                        v += &table[c][m];
                    }
                    v
                }
                Node::Seq(b, c) => {
                    let mut v = BigUint::zero();
                    if let Some((lo, hi)) = compiled.split_range(*b, *c, m) {
                        for i in lo..=hi {
                            let (x, y) = (&table[*b][i], &table[*c][m - i]);
                            if !x.is_zero() && !y.is_zero() {
                                v += x * y;
                            }
                        }
                    }
                    v
                }
            };
            table[id].push(v);
        }
    }
    if table.iter().any(|t| t[0] > BigUint::one()) {
        return Err(Error::Domain("grammar derives the empty word ambiguously".into()));
    }
    Ok(WordCounts { compiled, table, n_max })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OneDFinal {
    Any,
    /// Walks ending at height 0.
    Zero,
}

/// Independent DP over heights: number of walks of length `0..=n_max` with
/// every prefix sum nonnegative, ending anywhere or at 0.
pub fn oned_counts(m: &OneDModel, n_max: usize, fin: OneDFinal) -> CountSeries {
    let weights = m.weights();
    let a = m.a_bar.max(0) as usize;
    let mut cur = vec![BigUint::one()];
    let mut values = Vec::with_capacity(n_max + 1);
    values.push(BigUint::one());
    for t in 1..=n_max {
        let mut next = vec![BigUint::zero(); t * a + 1];
        for (h, c) in cur.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for &w in &weights {
                let nh = h as i64 + w;
                if nh >= 0 {
                    next[nh as usize] += c;
                }
            }
        }
        cur = next;
        values.push(match fin {
            OneDFinal::Any => cur.iter().sum(),
            OneDFinal::Zero => cur[0].clone(),
        });
    }
    let endpoint = match fin {
        OneDFinal::Any => Endpoint::Any,
        OneDFinal::Zero => Endpoint::Origin,
    };
    CountSeries::new(endpoint, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::build_grammar;
    use num_integer::binomial;
    use proptest::prelude::*;

    fn counts(w: &[i64], n: usize) -> WordCounts {
        count_words(&build_grammar(&OneDModel::from_weights(w)).unwrap(), n).unwrap()
    }

    fn brute(w: &[i64], n: usize, zero: bool) -> u64 {
        fn go(w: &[i64], n: usize, h: i64, zero: bool) -> u64 {
            if n == 0 {
                return u64::from(!zero || h == 0);
            }
            w.iter().filter(|&&s| h + s >= 0).map(|&s| go(w, n - 1, h + s, zero)).sum()
        }
        go(w, n, 0, zero)
    }

    #[test]
    fn ballot_and_dyck() {
        let c = counts(&[1, -1], 20);
        assert_eq!(c.get(Nonterminal::P, 4).unwrap(), &BigUint::from(6u32));
        assert_eq!(c.get(Nonterminal::D, 4).unwrap(), &BigUint::from(2u32));
        assert_eq!(c.get(Nonterminal::P, 0).unwrap(), &BigUint::one());
        for n in 0..=20u64 {
            let want = binomial(BigUint::from(n), BigUint::from(n.div_ceil(2)));
            assert_eq!(c.get(Nonterminal::P, n as usize).unwrap(), &want);
        }
    }

    #[test]
    fn oned_small_values() {
        let m = OneDModel::from_weights(&[1, -1]);
        let v: Vec<u64> = oned_counts(&m, 4, OneDFinal::Any).values.iter().map(|x| x.try_into().unwrap()).collect();
        assert_eq!(v, vec![1, 1, 2, 3, 6]);
        assert_eq!(oned_counts(&m, 4, OneDFinal::Zero).values[4], BigUint::from(2u32));
    }

    #[test]
    fn multiset_weighting() {
        let c = counts(&[1, -1, -1], 2);
        assert_eq!(c.get(Nonterminal::P, 2).unwrap(), &BigUint::from(3u32));
    }

    #[test]
    fn grammar_matches_brute_force() {
        for w in [&[2, -1, -1, -2][..], &[3, -2], &[1, 0, -1, -3], &[2, 2, 0, -1, -5]] {
            let c = counts(w, 10);
            for n in 0..=10 {
                assert_eq!(c.get(Nonterminal::P, n).unwrap(), &BigUint::from(brute(w, n, false)), "{w:?} {n}");
                assert_eq!(c.get(Nonterminal::D, n).unwrap(), &BigUint::from(brute(w, n, true)), "{w:?} {n}");
            }
        }
    }

    #[test]
    fn scaling_invariance() {
        let a = counts(&[2, -1, -3], 30);
        let b = counts(&[6, -3, -9], 30);
        assert_eq!(a.series(Nonterminal::P), b.series(Nonterminal::P));
        assert_eq!(a.series(Nonterminal::D), b.series(Nonterminal::D));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn grammar_equals_height_dp(
            mut w in proptest::collection::vec(-4i64..=4, 1..5),
            up in 1i64..=4,
            down in 1i64..=4,
        ) {
            w.push(up);
            w.push(-down);
            let m = OneDModel::from_weights(&w);
            let c = count_words(&build_grammar(&m).unwrap(), 25).unwrap();
            prop_assert_eq!(c.series(Nonterminal::P).unwrap(), oned_counts(&m, 25, OneDFinal::Any).values);
            prop_assert_eq!(c.series(Nonterminal::D).unwrap(), oned_counts(&m, 25, OneDFinal::Zero).values);
        }
    }
}
