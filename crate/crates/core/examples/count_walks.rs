// Exact counts of quadrant walks for each endpoint condition, the growth
// ratio and an exponent fit, and the plain-text export format.

use qwalk::cache::series_to_string;
use qwalk::enumerate::{estimate_growth, fit_subexp_exponent, quadrant_counts, Endpoint};
use qwalk::slope::optimal_slope;
use qwalk::stepset::presets;

pub fn run(n: usize) -> qwalk::Result<()> {
    let s = presets::reluctant_six();
    for e in [Endpoint::Any, Endpoint::Diagonal, Endpoint::Origin] {
        let q = quadrant_counts(&s, 12, e);
        let first: Vec<String> = q.values.iter().map(|v| v.to_string()).collect();
        println!("{e:>8}: {}", first.join(" "));
    }

    let series = quadrant_counts(&s, n, Endpoint::Any);
    let rho = optimal_slope(&s)?.rho_inv;
    println!("q_{n} has {} digits", series.get(n).to_string().len());
    println!("q_n / q_(n-1) = {:.5}, critical value {rho:.5}", estimate_growth(&series)?);
    let r = fit_subexp_exponent(&series, rho, (n / 2, n))?;
    println!("fitted exponent over [{}, {n}]: {r:.3}", n / 2);

    print!("{}", series_to_string(&presets::simple(), &quadrant_counts(&presets::simple(), 4, Endpoint::Any)));
    Ok(())
}

fn main() -> qwalk::Result<()> {
    let n = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(300);
    run(n)
}
