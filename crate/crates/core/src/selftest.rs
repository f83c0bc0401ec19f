//! Built-in consistency suite run by `qwalk selftest`: exact oracle
//! equalities plus chi-square uniformity of every sampler on a small case.

use num_bigint::BigUint;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::One;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cache;
use crate::enumerate::{
    brute_force_walks, quadrant_counts, sample_recursive, sample_recursive_traced, suffix_counts, Endpoint, Region,
    DEFAULT_MEM_BUDGET,
};
use crate::error::Result;
use crate::grammar::{build_grammar, count_words, oned_counts, validate_grammar, Nonterminal, OneDFinal, Symbol};
use crate::pipeline::{plan, sample_quadrant, Backend, PipelineConfig};
use crate::projection::OneDModel;
use crate::stats::uniformity;
use crate::stepset::{presets, StepSet};

#[derive(Debug, Clone)]
pub struct SelftestOptions {
    pub seed: u64,
    /// Draws per uniformity check.
    pub draws: u64,
    /// Appends an undefined nonterminal to a grammar before validation.
    pub corrupt_grammar: bool,
}

impl Default for SelftestOptions {
    fn default() -> Self {
        SelftestOptions { seed: 1, draws: 20_000, corrupt_grammar: false }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelftestReport {
    pub checks: Vec<Check>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn check(name: &str, r: Result<(bool, String)>) -> Check {
    let (passed, detail) = r.unwrap_or_else(|e| (false, e.to_string()));
    Check { name: name.into(), passed, detail }
}

fn dp_vs_brute() -> Result<(bool, String)> {
    for s in [presets::reluctant_six(), presets::simple(), presets::symmetric_reluctant()] {
        let q = quadrant_counts(&s, 6, Endpoint::Any);
        for n in 0..=6 {
            let b = brute_force_walks(&s, n, Region::Quadrant)?.len();
            if q.values[n] != BigUint::from(b) {
                return Ok((false, format!("{s} n={n}: dp {} brute {b}", q.values[n])));
            }
        }
    }
    Ok((true, "3 step sets, n <= 6".into()))
}

fn grammar_vs_height_dp(corrupt: bool) -> Result<(bool, String)> {
    let n = 60;
    for w in [&[1, -1][..], &[2, -1, -1, -2], &[1, 0, 0, -2], &[3, 1, -2, -2]] {
        let m = OneDModel::from_weights(w);
        let mut g = build_grammar(&m)?;
        if corrupt {
            let extra = Symbol::N(Nonterminal::L(g.a_bar() + 1));
            g.rules[0].alternatives[0].push(extra);
        }
        validate_grammar(&g)?;
        let c = count_words(&g, n)?;
        let any = oned_counts(&m, n, OneDFinal::Any).values;
        let zero = oned_counts(&m, n, OneDFinal::Zero).values;
        if c.series(Nonterminal::P).as_ref() != Some(&any) || c.series(Nonterminal::D).as_ref() != Some(&zero) {
            return Ok((false, format!("mismatch for weights {w:?}")));
        }
    }
    Ok((true, format!("4 models, n <= {n}")))
}

fn ballot() -> Result<(bool, String)> {
    let c = count_words(&build_grammar(&OneDModel::from_weights(&[1, -1]))?, 20)?;
    let ok = (0..=20u64).all(|n| {
        c.get(Nonterminal::P, n as usize) == Some(&binomial(BigUint::from(n), BigUint::from(n.div_ceil(2))))
    });
    Ok((ok, "n <= 20".into()))
}

fn probability_product(seed: u64) -> Result<(bool, String)> {
    let s = presets::reluctant_six();
    let t = suffix_counts(&s, 8, DEFAULT_MEM_BUDGET)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let want = BigRational::new(BigUint::one().into(), t.q_n().clone().into());
    for _ in 0..100 {
        let (_, trace) = sample_recursive_traced(&t, &mut rng)?;
        let p = trace
            .into_iter()
            .fold(BigRational::one(), |acc, (a, b)| acc * BigRational::new(a.into(), b.into()));
        if p != want {
            return Ok((false, format!("product {p}, expected {want}")));
        }
    }
    Ok((true, format!("100 walks, 1/{}", t.q_n())))
}

fn cache_round_trip() -> Result<(bool, String)> {
    let s = presets::reluctant_six();
    let t = suffix_counts(&s, 5, DEFAULT_MEM_BUDGET)?;
    let text = cache::table_to_string(&t);
    let ok = cache::table_to_string(&cache::table_from_str(&s, &text)?) == text;
    let q = quadrant_counts(&s, 30, Endpoint::Any);
    let st = cache::series_to_string(&s, &q);
    let (_, q2) = cache::series_from_str(&st)?;
    Ok((ok && q2 == q, "table n=5, series n=30".into()))
}

fn uniform_check(s: &StepSet, n: usize, o: &SelftestOptions, backend: Option<Backend>) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(o.seed);
    let r = match backend {
        None => {
            let t = suffix_counts(s, n, DEFAULT_MEM_BUDGET)?;
            uniformity(s, n, o.draws, 0.999, || sample_recursive(&t, &mut rng))?
        }
        Some(b) => {
            let p = plan(s, n, &PipelineConfig { backend: b, ..Default::default() })?;
            uniformity(s, n, o.draws, 0.999, || Ok(sample_quadrant(&p, &mut rng)?.0))?
        }
    };
    Ok((
        r.passed,
        format!("{} cells, chi2 {:.1} < {:.1}, outside {}", r.cells, r.statistic, r.quantile, r.outside),
    ))
}

pub fn run_selftest(o: &SelftestOptions) -> SelftestReport {
    let s = presets::reluctant_six();
    let n = 6;
    let checks = vec![
        check("dp_equals_brute_force", dp_vs_brute()),
        check("grammar_equals_height_dp", grammar_vs_height_dp(o.corrupt_grammar)),
        check("ballot_numbers", ballot()),
        check("recursive_probability_product", probability_product(o.seed)),
        check("cache_round_trip", cache_round_trip()),
        check("recursive_uniformity", uniform_check(&s, n, o, None)),
        check("rejection_uniformity_exact", uniform_check(&s, n, o, Some(Backend::Exact))),
        check("rejection_uniformity_guided", uniform_check(&s, n, o, Some(Backend::Guided))),
    ];
    SelftestReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_suite_passes() {
        let r = run_selftest(&SelftestOptions { draws: 5_000, ..Default::default() });
        for c in &r.checks {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }

    #[test]
    fn corrupt_grammar_fails() {
        let r = run_selftest(&SelftestOptions { draws: 200, corrupt_grammar: true, ..Default::default() });
        assert!(!r.passed());
        let c = r.checks.iter().find(|c| c.name == "grammar_equals_height_dp").unwrap();
        assert!(!c.passed);
        assert!(c.detail.contains("undefined symbol"), "{}", c.detail);
    }
}
