// Rejection from the half-plane grammar: plan once, then draw several
// walks with per-walk trial statistics. Output does not depend on
// `parallel`.

use qwalk::pipeline::{in_quadrant, plan, sample_many, PipelineConfig};
use qwalk::enumerate::Endpoint;
use qwalk::stepset::presets;

pub fn run(n: usize, k: usize) -> qwalk::Result<()> {
    let s = presets::symmetric_reluctant();
    let p = plan(&s, n, &PipelineConfig::default())?;
    println!("slope {}, weights {:?}, backend {:?}", p.slope, p.oned.weights(), p.backend());
    if let Some(h) = p.proposal_count() {
        println!("half-plane words of length {n}: {} digits", h.to_string().len());
    }
    let seq = sample_many(&p, k, 42, false)?;
    let par = sample_many(&p, k, 42, true)?;
    for ((w, st), (w2, _)) in seq.iter().zip(&par) {
        assert!(in_quadrant(w, Endpoint::Any) && w == w2);
        println!("trials {:>4}, generated steps {:>7}, endpoint {:?}", st.trials, st.generated_steps, w.endpoint());
    }

    let cfg = PipelineConfig { endpoint: Endpoint::Origin, ..Default::default() };
    let p = plan(&s, 30, &cfg)?;
    let (w, st) = sample_many(&p, 1, 1, false)?.remove(0);
    println!("excursion of length 30 after {} trials: {}", st.trials, w.to_text());
    Ok(())
}

fn main() -> qwalk::Result<()> {
    let n = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(400);
    run(n, 5)
}
