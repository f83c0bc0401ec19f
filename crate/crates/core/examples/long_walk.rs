// A long uniform walk of the six-step reluctant model by rejection,
// rendered to SVG. Takes a little over a minute at the default length in
// release mode.
//
// cargo run --release --example long_walk -- 18000 long_walk.svg

use std::path::PathBuf;
use std::time::Instant;

use qwalk::pipeline::{plan, sample_many, PipelineConfig};
use qwalk::projection::DeltaPolicy;
use qwalk::stepset::presets;
use qwalk::svg::render_svg;

fn main() -> qwalk::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(18_000);
    let path = args.next().map(PathBuf::from).unwrap_or_else(|| PathBuf::from("long_walk.svg"));

    let start = Instant::now();
    let cfg = PipelineConfig { delta_policy: DeltaPolicy::Sqrt, ..Default::default() };
    let p = plan(&presets::reluctant_six(), n, &cfg)?;
    println!("slope {}, weights {:?}, {:?} proposal, planned in {:.1}s", p.slope, p.oned.weights(), p.backend(), start.elapsed().as_secs_f64());
    let (w, st) = sample_many(&p, 1, 18, true)?.remove(0);
    println!("{} trials, {} generated steps, {:.1}s sampling", st.trials, st.generated_steps, st.elapsed.as_secs_f64());
    std::fs::write(&path, render_svg(&w).text)?;
    println!("walk ends at {:?}; written to {}", w.endpoint(), path.display());
    Ok(())
}
