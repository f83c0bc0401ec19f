// Samples a walk and writes it as an SVG file.
//
// cargo run --release --example render_svg -- 2000 walk.svg

use std::path::PathBuf;

use qwalk::pipeline::{plan, sample_many, PipelineConfig};
use qwalk::stepset::presets;
use qwalk::svg::{bounding_box, render_svg};

pub fn run(n: usize, path: PathBuf) -> qwalk::Result<()> {
    let p = plan(&presets::reluctant_six(), n, &PipelineConfig::default())?;
    let (w, st) = sample_many(&p, 1, 2024, false)?.remove(0);
    let doc = render_svg(&w);
    std::fs::write(&path, &doc.text)?;
    println!("{} steps after {} trials, box {:?}, {} bytes to {}", w.len(), st.trials, bounding_box(&w), doc.text.len(), path.display());
    Ok(())
}

fn main() -> qwalk::Result<()> {
    let mut args = std::env::args().skip(1);
    let n = args.next().and_then(|a| a.parse().ok()).unwrap_or(500);
    let path = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("qwalk.svg"));
    run(n, path)
}
