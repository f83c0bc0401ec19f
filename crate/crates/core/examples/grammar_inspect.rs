// The grammar of nonnegative one-dimensional walks: rules, validation,
// counts against a height DP, and a uniformly drawn word.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qwalk::grammar::{build_grammar, count_words, oned_counts, sample_word, validate_grammar, Nonterminal, OneDFinal};
use qwalk::projection::{normalize, project, OneDModel, RationalSlope};
use qwalk::stepset::presets;

pub fn run() -> qwalk::Result<()> {
    let m = normalize(&project(&presets::symmetric_reluctant(), &RationalSlope::exact(1, 1)?)?);
    let g = build_grammar(&m)?;
    print!("{g}");
    println!("{:?}", validate_grammar(&g)?);

    let counts = count_words(&g, 40)?;
    let dp = oned_counts(&m, 40, OneDFinal::Any);
    println!("P(40) = {} (height DP agrees: {})", counts.get(Nonterminal::P, 40).unwrap(), counts.series(Nonterminal::P) == Some(dp.values));

    let word = sample_word(&counts, Nonterminal::D, 20, &mut ChaCha8Rng::seed_from_u64(4))?;
    let heights: Vec<i64> = word
        .iter()
        .scan(0, |h, &t| {
            *h += m.terminals[t].weight;
            Some(*h)
        })
        .collect();
    println!("excursion heights {heights:?}");

    let multiset = build_grammar(&OneDModel::from_weights(&[3, 0, -1, -1, -2]))?;
    println!("{}", serde_json::to_string(&multiset.to_json()["rules"][2]).unwrap_or_default());
    Ok(())
}

fn main() -> qwalk::Result<()> {
    run()
}
