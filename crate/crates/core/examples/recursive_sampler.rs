// Recursive sampling over the full suffix table, with the probability of
// each draw recovered from its trace, and a table cache round trip.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::One;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qwalk::cache::{load_table, save_table};
use qwalk::enumerate::{sample_recursive, sample_recursive_traced, suffix_counts, DEFAULT_MEM_BUDGET};
use qwalk::stepset::presets;

pub fn run(n: usize) -> qwalk::Result<()> {
    let s = presets::reluctant_six();
    let table = suffix_counts(&s, n, DEFAULT_MEM_BUDGET)?;
    println!("q_{n} = {}", table.q_n());

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (w, trace) = sample_recursive_traced(&table, &mut rng)?;
    let p = trace.into_iter().fold(BigRational::one(), |acc, (a, b)| acc * BigRational::new(a.into(), b.into()));
    println!("{}", w.to_text());
    println!("probability {p} (1/q_n: {})", p == BigRational::new(BigUint::one().into(), table.q_n().clone().into()));

    let path = std::env::temp_dir().join(format!("qwalk-table-{n}.txt"));
    save_table(&path, &table)?;
    let back = load_table(&path, &s)?;
    let mut a = ChaCha8Rng::seed_from_u64(9);
    let mut b = ChaCha8Rng::seed_from_u64(9);
    let same = sample_recursive(&table, &mut a)? == sample_recursive(&back, &mut b)?;
    println!("cached table at {} resamples identically: {same}", path.display());
    std::fs::remove_file(&path)?;
    Ok(())
}

fn main() -> qwalk::Result<()> {
    let n = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(30);
    run(n)
}
