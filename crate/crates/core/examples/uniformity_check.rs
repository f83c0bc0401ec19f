// Chi-square test of both samplers against brute-force enumeration.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qwalk::enumerate::{sample_recursive, suffix_counts, DEFAULT_MEM_BUDGET};
use qwalk::pipeline::{plan, sample_quadrant, PipelineConfig};
use qwalk::stats::uniformity;
use qwalk::stepset::presets;

pub fn run(draws: u64) -> qwalk::Result<()> {
    let s = presets::reluctant_six();
    let n = 6;
    let t = suffix_counts(&s, n, DEFAULT_MEM_BUDGET)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let r = uniformity(&s, n, draws, 0.999, || sample_recursive(&t, &mut rng))?;
    println!("recursive: {} cells, chi2 {:.1}, 0.999 quantile {:.1}", r.cells, r.statistic, r.quantile);

    let p = plan(&s, n, &PipelineConfig::default())?;
    let r = uniformity(&s, n, draws, 0.999, || Ok(sample_quadrant(&p, &mut rng)?.0))?;
    println!("rejection: {} cells, chi2 {:.1}, 0.999 quantile {:.1}", r.cells, r.statistic, r.quantile);
    Ok(())
}

fn main() -> qwalk::Result<()> {
    let draws = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(50_000);
    run(draws)
}
