// Rational approximation of an irrational optimal slope and the projected
// weights it produces under each tolerance policy.

use qwalk::pipeline::select_slope;
use qwalk::projection::{normalize, project, rational_approx, DeltaPolicy};
use qwalk::slope::optimal_slope;
use qwalk::stepset::presets;

pub fn run() -> qwalk::Result<()> {
    let r = rational_approx(0.6309298, 0.01)?;
    println!("0.6309298 within 0.01: {r}");

    let s = presets::reluctant_six();
    let info = optimal_slope(&s)?;
    println!("optimal slope {:?} ({})", info.slope_m, info.slope_kind.name());
    for policy in [DeltaPolicy::Exact, DeltaPolicy::Sqrt, DeltaPolicy::Fixed(0.05)] {
        for n in [10, 100, 1000, 10_000] {
            let sl = select_slope(&info, n, policy)?;
            let m = normalize(&project(&s, &sl)?);
            println!("{policy:>10} n = {n:>5}: {sl:>7}  weights {:?}", m.weights());
        }
    }
    Ok(())
}

fn main() -> qwalk::Result<()> {
    run()
}
