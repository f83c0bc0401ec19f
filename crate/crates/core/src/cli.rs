//! The `qwalk` command line. [`run`] parses arguments, writes to the given
//! streams and returns the process exit code: 0 on success, 1 when the
//! self-test fails, 2 on usage, parse or domain errors, 3 when a memory
//! budget or trial cap is hit.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::cache;
use crate::enumerate::{
    quadrant_counts, sample_recursive, suffix_counts, table_bytes, CountSeries, CountTable, Endpoint, Walk,
    DEFAULT_MEM_BUDGET,
};
use crate::error::{Error, Result};
use crate::grammar::{build_grammar, validate_grammar};
use crate::pipeline::{plan, sample_many, select_slope, Backend, PipelineConfig, TrialStats, DEFAULT_TRIAL_CAP};
use crate::projection::{normalize, project, DeltaPolicy, OneDModel, RationalSlope};
use crate::selftest::{run_selftest, SelftestOptions};
use crate::slope::{exponent_r, optimal_slope, ExponentVariant, DEFAULT_VARIANT};
use crate::stepset::{classify, presets, StepSet, DEFAULT_TRIVIALITY_HORIZON};
use crate::svg::render_svg;

/// Longest walk for which `--method auto` considers the recursive sampler.
pub const AUTO_RECURSIVE_MAX_N: usize = 500;

#[derive(Parser, Debug)]
#[command(name = "qwalk", version, about = "Uniform random quarter-plane walks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub config: RunConfig,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Classification, growth constant, optimal slope and exponents
    Analyze,
    /// Exact counts q_0..q_n
    Count,
    /// Uniform random walks of length n
    Sample,
    /// Grammar of the projected one-dimensional model
    Grammar,
    /// SVG picture of a walk (given with --walk, else sampled)
    Render,
    /// Oracle and uniformity checks
    Selftest,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Rejection,
    Recursive,
    Auto,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
    Svg,
}

#[derive(Args, Debug, Clone)]
pub struct RunConfig {
    /// Step multiset, e.g. "(1,0);(0,1);(-1,-1)"
    #[arg(long, global = true, default_value = presets::RELUCTANT_SIX)]
    pub steps: String,
    #[arg(short = 'n', global = true, default_value_t = 10)]
    pub n: usize,
    /// Number of walks to sample
    #[arg(short = 'k', global = true, default_value_t = 1)]
    pub k: usize,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Method::Auto)]
    pub method: Method,
    /// any | origin | diagonal
    #[arg(long, global = true, default_value = "any")]
    pub endpoint: Endpoint,
    /// exact | sqrt | fixed:<delta>
    #[arg(long, global = true, default_value = "exact")]
    pub delta_policy: DeltaPolicy,
    /// Half-plane slope p/q used instead of the optimal one
    #[arg(long, global = true)]
    pub slope_override: Option<RationalSlope>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Memory budget for the recursive sampler's table, in bytes
    #[arg(long, global = true, default_value_t = DEFAULT_MEM_BUDGET)]
    pub mem_budget: u128,
    #[arg(long, global = true, default_value_t = DEFAULT_TRIAL_CAP)]
    pub trial_cap: u64,
    /// Count file (count) or suffix table file (recursive sampling); read
    /// if present, written otherwise
    #[arg(long, global = true)]
    pub cache: Option<PathBuf>,
    /// Proposal counts for rejection: exact | guided | auto
    #[arg(long, global = true, default_value = "auto")]
    pub backend: Backend,
    /// Run rejection trials on all threads
    #[arg(long, global = true)]
    pub parallel: bool,
    /// One-dimensional weights for `grammar`, e.g. "2,-1,-1,-2"
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub weights: Option<String>,
    /// Walk to render, as "dx,dy;dx,dy;..."
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub walk: Option<String>,
    /// Draws per self-test uniformity check
    #[arg(long, global = true, default_value_t = 20_000)]
    pub draws: u64,
    #[arg(long, global = true, hide = true)]
    pub inject_corrupt_grammar: bool,
}

impl RunConfig {
    fn stepset(&self) -> Result<StepSet> {
        StepSet::parse(&self.steps)
    }

    fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            endpoint: self.endpoint,
            delta_policy: self.delta_policy,
            slope_override: self.slope_override,
            trial_cap: self.trial_cap,
            backend: self.backend,
            variant: DEFAULT_VARIANT,
        }
    }
}

/// Runs the command line `args` (program name first).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let _ = write!(err, "{e}");
            return 2;
        }
    };
    let c = &cli.config;
    let res = match cli.command {
        Command::Analyze => cmd_analyze(c, out),
        Command::Count => cmd_count(c, out),
        Command::Sample => cmd_sample(c, out, err),
        Command::Grammar => cmd_grammar(c, out),
        Command::Render => cmd_render(c, out, err),
        Command::Selftest => cmd_selftest(c, out),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn write_json(out: &mut dyn Write, v: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(v).map_err(|e| Error::Numeric(e.to_string()))?;
    writeln!(out, "{text}")?;
    Ok(())
}

/// `key: value` lines for the top level of a JSON object.
fn write_flat(out: &mut dyn Write, v: &Value) -> Result<()> {
    if let Value::Object(map) = v {
        for (k, v) in map {
            match v {
                Value::String(s) => writeln!(out, "{k}: {s}")?,
                other => writeln!(out, "{k}: {other}")?,
            }
        }
    }
    Ok(())
}

fn unsupported(cmd: &str, f: Format) -> Error {
    Error::Argument(format!("{cmd} has no {f:?} output").to_lowercase())
}

pub fn analyze_report(s: &StepSet, n: usize, policy: DeltaPolicy) -> Result<Value> {
    let cls = classify(s, DEFAULT_TRIVIALITY_HORIZON);
    let info = optimal_slope(s)?;
    let r = |v| if cls.reluctant { exponent_r(s, v).ok() } else { None };
    let (p, q) = info.slope_kind.exact_pq().unzip();
    let proposal = if cls.trivial || n == 0 {
        Value::Null
    } else {
        let sl = select_slope(&info, n, policy)?;
        json!({ "n": n, "p": sl.p, "q": sl.q, "delta": sl.delta_used })
    };
    Ok(json!({
        "steps": s.to_string(),
        "drift": [cls.drift.0, cls.drift.1],
        "reluctant": cls.reluctant,
        "singular": cls.singular,
        "trivial": cls.trivial,
        "alpha": info.critical.map(|c| c.alpha),
        "beta": info.critical.map(|c| c.beta),
        "rho_inv": info.rho_inv,
        "theta_star": info.theta_star,
        "m": info.slope_m,
        "slope_kind": info.slope_kind.name(),
        "p": p,
        "q": q,
        "r_variant_A": r(ExponentVariant::A),
        "r_variant_B": r(ExponentVariant::B),
        "default_variant": format!("{DEFAULT_VARIANT:?}"),
        "predicted_trial_exponent": r(DEFAULT_VARIANT).map(|r| r - 1.5),
        "proposal_slope": proposal,
    }))
}

fn cmd_analyze(c: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    let v = analyze_report(&c.stepset()?, c.n, c.delta_policy)?;
    match c.format.unwrap_or(Format::Json) {
        Format::Json => write_json(out, &v)?,
        Format::Text => write_flat(out, &v)?,
        f => return Err(unsupported("analyze", f)),
    }
    Ok(0)
}

fn counts(c: &RunConfig, s: &StepSet) -> Result<CountSeries> {
    if let Some(path) = c.cache.as_deref().filter(|p| p.exists()) {
        let (cs, mut series) = cache::load_series(path)?;
        if &cs != s || series.endpoint != c.endpoint {
            return Err(Error::Cache(format!("{} holds counts for other steps or endpoint", path.display())));
        }
        if series.n_max() < c.n {
            return Err(Error::Cache(format!("{} only reaches n = {}", path.display(), series.n_max())));
        }
        series.values.truncate(c.n + 1);
        return Ok(series);
    }
    let series = quadrant_counts(s, c.n, c.endpoint);
    if let Some(path) = &c.cache {
        cache::save_series(path, s, &series)?;
    }
    Ok(series)
}

fn cmd_count(c: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    let s = c.stepset()?;
    let series = counts(c, &s)?;
    match c.format.unwrap_or(Format::Text) {
        Format::Text => out.write_all(cache::series_to_string(&s, &series).as_bytes())?,
        Format::Json => write_json(
            out,
            &json!({
                "steps": s.to_string(),
                "endpoint": series.endpoint,
                "n": c.n,
                "counts": series.values.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            }),
        )?,
        f => return Err(unsupported("count", f)),
    }
    Ok(0)
}

/// Method actually used: `auto` takes the recursive sampler when the walk
/// ends anywhere, `n <= 500` and the suffix table fits the memory budget.
pub fn resolve_method(c: &RunConfig, s: &StepSet) -> Method {
    match c.method {
        Method::Auto
            if c.endpoint == Endpoint::Any
                && c.n <= AUTO_RECURSIVE_MAX_N
                && table_bytes(s, c.n) <= c.mem_budget =>
        {
            Method::Recursive
        }
        Method::Auto => Method::Rejection,
        m => m,
    }
}

fn table(c: &RunConfig, s: &StepSet) -> Result<CountTable> {
    if let Some(path) = c.cache.as_deref().filter(|p| p.exists()) {
        let t = cache::load_table(path, s)?;
        if t.n_max() != c.n {
            return Err(Error::Cache(format!("{} holds a table for n = {}", path.display(), t.n_max())));
        }
        return Ok(t);
    }
    let t = suffix_counts(s, c.n, c.mem_budget)?;
    if let Some(path) = &c.cache {
        cache::save_table(path, &t)?;
    }
    Ok(t)
}

struct Sampled {
    method: Method,
    meta: Value,
    walks: Vec<(Walk, Option<TrialStats>)>,
}

fn sample_walks(c: &RunConfig, s: &StepSet, k: usize) -> Result<Sampled> {
    if k == 0 {
        return Err(Error::Argument("k must be at least 1".into()));
    }
    match resolve_method(c, s) {
        Method::Recursive => {
            if c.endpoint != Endpoint::Any {
                return Err(Error::Argument("the recursive sampler draws walks with endpoint any".into()));
            }
            let t = table(c, s)?;
            let walks = (0..k as u64)
                .map(|i| {
                    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
                    rng.set_stream(i);
                    Ok((sample_recursive(&t, &mut rng)?, None))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Sampled { method: Method::Recursive, meta: json!({ "q_n": t.q_n().to_string() }), walks })
        }
        _ => {
            let p = plan(s, c.n, &c.pipeline())?;
            let meta = json!({
                "slope": p.slope.to_string(),
                "weights": p.oned.weights(),
                "backend": p.backend(),
                "proposal_count": p.proposal_count().map(|v| v.to_string()),
            });
            let walks = sample_many(&p, k, c.seed, c.parallel)?.into_iter().map(|(w, t)| (w, Some(t))).collect();
            Ok(Sampled { method: Method::Rejection, meta, walks })
        }
    }
}

fn report_stats(err: &mut dyn Write, walks: &[(Walk, Option<TrialStats>)]) {
    for (i, (_, st)) in walks.iter().enumerate() {
        if let Some(st) = st {
            let _ = writeln!(
                err,
                "# walk {i}: trials={} generated_steps={} elapsed={:.3}s",
                st.trials,
                st.generated_steps,
                st.elapsed.as_secs_f64()
            );
        }
    }
}

fn cmd_sample(c: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let s = c.stepset()?;
    let fmt = c.format.unwrap_or(Format::Text);
    let got = sample_walks(c, &s, if fmt == Format::Svg { 1 } else { c.k })?;
    report_stats(err, &got.walks);
    match fmt {
        Format::Text => {
            for (w, _) in &got.walks {
                writeln!(out, "{}", w.to_text())?;
            }
        }
        Format::Json => {
            let walks: Vec<Value> = got
                .walks
                .iter()
                .map(|(w, st)| {
                    let mut v = serde_json::to_value(w.to_json()).unwrap_or(Value::Null);
                    v["stats"] = serde_json::to_value(st).unwrap_or(Value::Null);
                    v
                })
                .collect();
            write_json(
                out,
                &json!({
                    "steps": s.to_string(),
                    "n": c.n,
                    "seed": c.seed,
                    "endpoint": c.endpoint,
                    "method": format!("{:?}", got.method).to_lowercase(),
                    "sampler": got.meta,
                    "walks": walks,
                }),
            )?;
        }
        Format::Svg => out.write_all(render_svg(&got.walks[0].0).text.as_bytes())?,
    }
    Ok(0)
}

fn parse_weights(text: &str) -> Result<Vec<i64>> {
    text.split(',')
        .map(|t| {
            t.trim().parse().map_err(|_| Error::Parse { token: t.to_string(), reason: "expected an integer weight".into() })
        })
        .collect()
}

fn cmd_grammar(c: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    let (model, slope) = match &c.weights {
        Some(w) => (OneDModel::from_weights(&parse_weights(w)?), None),
        None => {
            let s = c.stepset()?;
            let slope = match c.slope_override {
                Some(r) => r,
                None => select_slope(&optimal_slope(&s)?, c.n, c.delta_policy)?,
            };
            (normalize(&project(&s, &slope)?), Some(slope))
        }
    };
    let g = build_grammar(&model)?;
    let report = validate_grammar(&g)?;
    match c.format.unwrap_or(Format::Text) {
        Format::Text => {
            if let Some(sl) = slope {
                writeln!(out, "# slope {sl}")?;
            }
            writeln!(out, "# weights {:?}", model.weights())?;
            write!(out, "{g}")?;
        }
        Format::Json => write_json(
            out,
            &json!({
                "slope": slope.map(|s| s.to_string()),
                "weights": model.weights(),
                "grammar": g.to_json(),
                "validation": report,
            }),
        )?,
        f => return Err(unsupported("grammar", f)),
    }
    Ok(0)
}

fn cmd_render(c: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let s = c.stepset()?;
    let w = match &c.walk {
        Some(t) => Walk::parse_text(&s, t)?,
        None => {
            let got = sample_walks(c, &s, 1)?;
            report_stats(err, &got.walks);
            got.walks.into_iter().next().expect("one walk").0
        }
    };
    out.write_all(render_svg(&w).text.as_bytes())?;
    Ok(0)
}

fn cmd_selftest(c: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    let report = run_selftest(&SelftestOptions {
        seed: c.seed,
        draws: c.draws,
        corrupt_grammar: c.inject_corrupt_grammar,
    });
    match c.format.unwrap_or(Format::Text) {
        Format::Text => {
            for ch in &report.checks {
                writeln!(out, "{} {}: {}", if ch.passed { "PASS" } else { "FAIL" }, ch.name, ch.detail)?;
            }
            let failed = report.checks.iter().filter(|c| !c.passed).count();
            writeln!(out, "{} checks, {failed} failed", report.checks.len())?;
        }
        Format::Json => write_json(
            out,
            &json!({ "passed": report.passed(), "checks": report.checks }),
        )?,
        f => return Err(unsupported("selftest", f)),
    }
    Ok(if report.passed() { 0 } else { 1 })
}
