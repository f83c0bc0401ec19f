// Classification, optimal slope, growth constant and exponent guesses for
// a few step sets.
//
// cargo run --example analyze_stepset -- "(1,1);(-1,0);(0,-1)"

use qwalk::slope::{exponent_r, optimal_slope, ExponentVariant};
use qwalk::stepset::{classify, presets, StepSet, DEFAULT_TRIVIALITY_HORIZON};

pub fn run(texts: &[String]) -> qwalk::Result<()> {
    for text in texts {
        let s = StepSet::parse(text)?;
        let c = classify(&s, DEFAULT_TRIVIALITY_HORIZON);
        println!("{s}");
        println!("  drift {:?}, reluctant {}, singular {}, trivial {}", c.drift, c.reluctant, c.singular, c.trivial);
        if c.trivial {
            continue;
        }
        let info = optimal_slope(&s)?;
        if let Some(cp) = info.critical {
            println!("  critical point ({:.6}, {:.6})", cp.alpha, cp.beta);
        }
        println!("  growth {:.6}, slope {:?} ({})", info.rho_inv, info.slope_m, info.slope_kind.name());
        if c.reluctant {
            let a = exponent_r(&s, ExponentVariant::A)?;
            let b = exponent_r(&s, ExponentVariant::B)?;
            println!("  r: A = {a:.4}, B = {b:.4}; expected trials grow like n^{:.3}", a - 1.5);
        }
    }
    Ok(())
}

fn main() -> qwalk::Result<()> {
    let mut args: Vec<String> = std::env::args().skip(1).collect();
    if args.is_empty() {
        args = [presets::RELUCTANT_SIX, presets::SIMPLE, presets::SYMMETRIC_RELUCTANT, "(1,1);(1,-1);(-1,-1)"]
            .map(String::from)
            .to_vec();
    }
    run(&args)
}
