//! Rejection sampling of quadrant walks from a half-plane proposal: pick a
//! slope, project the steps, draw grammar words of the projected model and
//! keep the first one whose 2D reading stays in the quadrant.

use std::time::{Duration, Instant};

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::enumerate::{Endpoint, Walk};
use crate::error::{Error, Result};
use crate::grammar::{
    build_grammar, count_words, derive_guided, derive_word, guided_counts, validate_grammar, Derivation,
    Grammar, GuidedCounts, Nonterminal, WordCounts,
};
use crate::projection::{choose_delta, normalize, project, rational_approx, DeltaPolicy, OneDModel, RationalSlope};
use crate::slope::{exponent_r, optimal_slope, ExponentVariant, SlopeInfo, SlopeKind, DEFAULT_VARIANT};
use crate::stepset::{classify, StepSet, DEFAULT_TRIVIALITY_HORIZON};

pub const DEFAULT_TRIAL_CAP: u64 = 10_000_000;

/// Above this estimated cost (in word operations) exact big-integer word
/// counting gives way to the guided floating-point table.
const EXACT_COST_LIMIT: f64 = 4e9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    /// Big-integer word counts.
    Exact,
    /// Floating-point counts with an exact acceptance correction.
    Guided,
    #[default]
    Auto,
}

impl std::str::FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Backend::Exact),
            "guided" => Ok(Backend::Guided),
            "auto" => Ok(Backend::Auto),
            other => Err(Error::Argument(format!("unknown backend `{other}` (expected exact, guided or auto)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    pub endpoint: Endpoint,
    pub delta_policy: DeltaPolicy,
    pub slope_override: Option<RationalSlope>,
    pub trial_cap: u64,
    pub backend: Backend,
    pub variant: ExponentVariant,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            endpoint: Endpoint::Any,
            delta_policy: DeltaPolicy::Exact,
            slope_override: None,
            trial_cap: DEFAULT_TRIAL_CAP,
            backend: Backend::Auto,
            variant: DEFAULT_VARIANT,
        }
    }
}

#[derive(Debug, Clone)]
pub enum Proposal {
    Exact(WordCounts),
    Guided(GuidedCounts),
}

/// Everything computed once and shared by all draws of length `n`.
#[derive(Debug, Clone)]
pub struct SamplerPlan {
    pub stepset: StepSet,
    pub n: usize,
    pub slope: RationalSlope,
    pub oned: OneDModel,
    pub grammar: Grammar,
    pub proposal: Proposal,
    pub endpoint: Endpoint,
    pub slope_info: SlopeInfo,
    /// `r - 3/2` for reluctant models.
    pub predicted_trial_exponent: Option<f64>,
    pub trial_cap: u64,
}

impl SamplerPlan {
    /// `P` for walks ending anywhere or on the diagonal, `D` for
    /// excursions.
    pub fn nonterminal(&self) -> Nonterminal {
        match self.endpoint {
            Endpoint::Origin => Nonterminal::D,
            _ => Nonterminal::P,
        }
    }

    /// Exact number of proposal words of length `n`, when counted exactly.
    pub fn proposal_count(&self) -> Option<&BigUint> {
        match &self.proposal {
            Proposal::Exact(c) => c.get(self.nonterminal(), self.n),
            Proposal::Guided(_) => None,
        }
    }

    pub fn backend(&self) -> Backend {
        match self.proposal {
            Proposal::Exact(_) => Backend::Exact,
            Proposal::Guided(_) => Backend::Guided,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialStats {
    /// Proposals drawn, the accepted one included.
    pub trials: u64,
    /// Wall-clock time; left out of serialized output so that it stays
    /// reproducible.
    #[serde(skip)]
    pub elapsed: Duration,
    /// Steps generated over all proposals; rejected proposals stop at
    /// their first step outside the quadrant.
    pub generated_steps: u64,
    pub predicted_trial_exponent: Option<f64>,
}

/// Slope used for length `n` by the rejection sampler: `0` for singular
/// models, `1/0` for `m = infinity`, the exact value when rational, and a
/// rational approximation within `choose_delta(n)` otherwise.
pub fn select_slope(info: &SlopeInfo, n: usize, policy: DeltaPolicy) -> Result<RationalSlope> {
    match info.slope_kind {
        SlopeKind::Rational { p, q } | SlopeKind::Boundary { p, q } => RationalSlope::exact(p, q),
        SlopeKind::Irrational => {
            let m = info.slope_m.ok_or_else(|| Error::Numeric("irrational slope without a value".into()))?;
            rational_approx(m, choose_delta(n.max(1), policy)?)
        }
    }
}

fn exact_cost(g: &Grammar, n: usize) -> f64 {
    let rules: usize = g.rules.iter().map(|r| r.alternatives.iter().map(|b| b.len().max(1)).sum::<usize>()).sum();
    let growth = g.model.len().max(2) as f64;
    let words = (n as f64 * growth.log2() / 64.0).max(1.0);
    rules as f64 * (n as f64).powi(2) / 2.0 * words * words
}

pub fn plan(s: &StepSet, n: usize, config: &PipelineConfig) -> Result<SamplerPlan> {
    if classify(s, DEFAULT_TRIVIALITY_HORIZON).trivial {
        return Err(Error::Trivial(format!("no quadrant walk of some length up to {DEFAULT_TRIVIALITY_HORIZON}")));
    }
    let slope_info = optimal_slope(s)?;
    let slope = match config.slope_override {
        Some(r) => r,
        None => select_slope(&slope_info, n, config.delta_policy)?,
    };
    let oned = normalize(&project(s, &slope)?);
    let grammar = build_grammar(&oned)?;
    validate_grammar(&grammar)?;
    let proposal = match config.backend {
        Backend::Exact => Proposal::Exact(count_words(&grammar, n)?),
        Backend::Guided => Proposal::Guided(guided_counts(&grammar, n)?),
        Backend::Auto if exact_cost(&grammar, n) <= EXACT_COST_LIMIT => Proposal::Exact(count_words(&grammar, n)?),
        Backend::Auto => match guided_counts(&grammar, n) {
            Ok(g) => Proposal::Guided(g),
            Err(Error::Numeric(_)) => Proposal::Exact(count_words(&grammar, n)?),
            Err(e) => return Err(e),
        },
    };
    let (dx, dy) = s.drift();
    let predicted_trial_exponent = if dx < 0 && dy < 0 {
        exponent_r(s, config.variant).ok().map(|r| r - 1.5)
    } else {
        None
    };
    Ok(SamplerPlan {
        stepset: s.clone(),
        n,
        slope,
        oned,
        grammar,
        proposal,
        endpoint: config.endpoint,
        slope_info,
        predicted_trial_exponent,
        trial_cap: config.trial_cap,
    })
}

/// Reads a word of terminal indices as the 2D steps they came from.
pub fn map_to_2d(word: &[usize], plan: &SamplerPlan) -> Walk {
    let idx = word.iter().map(|&k| plan.oned.terminals[k].origin).collect();
    Walk::new(plan.stepset.clone(), idx)
}

/// Whether the walk stays in the quadrant and meets the endpoint condition.
pub fn in_quadrant(w: &Walk, endpoint: Endpoint) -> bool {
    let pos = w.positions();
    let (x, y) = *pos.last().expect("positions start at the origin");
    pos.iter().all(|&(x, y)| x >= 0 && y >= 0) && endpoint.accepts(x, y)
}

/// One proposal. Returns the walk if accepted, and the number of steps
/// generated before a decision.
pub fn trial<R: Rng + ?Sized>(plan: &SamplerPlan, rng: &mut R) -> Result<(Option<Walk>, u64)> {
    let steps = plan.stepset.steps();
    let terms = &plan.oned.terminals;
    let mut idx = Vec::with_capacity(plan.n);
    let (mut x, mut y) = (0i64, 0i64);
    let emit = |k: usize| {
        let o = terms[k].origin;
        x += steps[o].dx;
        y += steps[o].dy;
        idx.push(o);
        x >= 0 && y >= 0
    };
    let nt = plan.nonterminal();
    let d = match &plan.proposal {
        Proposal::Exact(c) => derive_word(c, nt, plan.n, rng, emit)?,
        Proposal::Guided(g) => derive_guided(g, nt, plan.n, rng, emit)?,
    };
    let generated = idx.len() as u64;
    if d != Derivation::Complete || !plan.endpoint.accepts(x, y) {
        return Ok((None, generated));
    }
    Ok((Some(Walk::new(plan.stepset.clone(), idx)), generated))
}

/// Repeats proposals from `rng` until one is accepted.
pub fn sample_quadrant<R: Rng + ?Sized>(plan: &SamplerPlan, rng: &mut R) -> Result<(Walk, TrialStats)> {
    let start = Instant::now();
    let mut generated_steps = 0;
    for trials in 1..=plan.trial_cap {
        let (w, g) = trial(plan, rng)?;
        generated_steps += g;
        if let Some(w) = w {
            let stats = TrialStats {
                trials,
                elapsed: start.elapsed(),
                generated_steps,
                predicted_trial_exponent: plan.predicted_trial_exponent,
            };
            return Ok((w, stats));
        }
    }
    Err(Error::TrialCap { cap: plan.trial_cap, trials: plan.trial_cap })
}

/// Random source of trial `trial` of sample `sample`.
pub fn trial_rng(seed: u64, sample: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((sample << 32) | (trial & 0xffff_ffff));
    rng
}

/// Sample `sample` under the seeding contract: trial `j` uses
/// [`trial_rng`]`(seed, sample, j)` and the accepted trial of smallest index
/// wins, so the result does not depend on `parallel`.
pub fn sample_indexed(plan: &SamplerPlan, seed: u64, sample: u64, parallel: bool) -> Result<(Walk, TrialStats)> {
    if plan.trial_cap > 1 << 32 {
        return Err(Error::Argument("trial cap above 2^32 breaks the stream layout".into()));
    }
    let start = Instant::now();
    let batch: u64 = if parallel { 16 * rayon::current_num_threads() as u64 } else { 1 };
    let mut generated_steps = 0u64;
    let mut next = 0u64;
    while next < plan.trial_cap {
        let end = (next + batch).min(plan.trial_cap);
        let run = |j: u64| -> Result<(Option<Walk>, u64)> { trial(plan, &mut trial_rng(seed, sample, j)) };
        let results: Vec<Result<(Option<Walk>, u64)>> = if parallel {
            (next..end).into_par_iter().map(run).collect()
        } else {
            (next..end).map(run).collect()
        };
        for (j, r) in (next..end).zip(results) {
            let (w, g) = r?;
            generated_steps += g;
            if let Some(w) = w {
                let stats = TrialStats {
                    trials: j + 1,
                    elapsed: start.elapsed(),
                    generated_steps,
                    predicted_trial_exponent: plan.predicted_trial_exponent,
                };
                return Ok((w, stats));
            }
        }
        next = end;
    }
    Err(Error::TrialCap { cap: plan.trial_cap, trials: plan.trial_cap })
}

/// `k` independent samples; deterministic in `seed`, whatever `parallel`.
pub fn sample_many(plan: &SamplerPlan, k: usize, seed: u64, parallel: bool) -> Result<Vec<(Walk, TrialStats)>> {
    if k == 0 {
        return Err(Error::Argument("k must be at least 1".into()));
    }
    if parallel && k > 1 {
        (0..k as u64).into_par_iter().map(|i| sample_indexed(plan, seed, i, false)).collect()
    } else {
        (0..k as u64).map(|i| sample_indexed(plan, seed, i, parallel)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::{brute_force_walks, quadrant_counts, Region};
    use crate::stepset::presets;
    use num_traits::ToPrimitive;

    fn plan_for(s: &StepSet, n: usize) -> SamplerPlan {
        plan(s, n, &PipelineConfig::default()).unwrap()
    }

    #[test]
    fn slope_branches() {
        let p = plan_for(&presets::symmetric_reluctant(), 50);
        assert_eq!((p.slope.p, p.slope.q), (1, 1));
        assert_eq!(p.oned.weights(), vec![2, -1, -1, -2]);
        let s = StepSet::parse("(1,1);(1,-1);(-1,-1)").unwrap();
        let p = plan_for(&s, 10);
        assert_eq!((p.slope.p, p.slope.q), (0, 1));
        assert_eq!(p.oned.weights(), vec![1, -1, -1]);
        let p = plan_for(&presets::reluctant_six(), 8);
        assert_eq!((p.slope.p, p.slope.q), (1, 2));
    }

    #[test]
    fn map_and_check() {
        let p = plan_for(&presets::reluctant_six(), 4);
        let w = map_to_2d(&[1, 3], &p);
        assert_eq!(w.positions(), vec![(0, 0), (0, 1), (1, 0)]);
        assert!(in_quadrant(&w, Endpoint::Any));
        assert!(!in_quadrant(&w, Endpoint::Origin));
        assert!(map_to_2d(&[], &p).is_empty());
        let w = map_to_2d(&[2], &p);
        assert!(!in_quadrant(&w, Endpoint::Any));
    }

    #[test]
    fn empty_walk_takes_one_trial() {
        let p = plan_for(&presets::reluctant_six(), 0);
        let (w, st) = sample_indexed(&p, 1, 0, false).unwrap();
        assert!(w.is_empty());
        assert_eq!(st.trials, 1);
    }

    #[test]
    fn support_covers_every_quadrant_walk() {
        for s in [presets::reluctant_six(), presets::simple(), presets::symmetric_reluctant()] {
            let n = 7;
            let p = plan_for(&s, n);
            let r = Region::HalfPlane { p: p.slope.p as i64, q: p.slope.q as i64 };
            let half = brute_force_walks(&s, n, r).unwrap().len();
            assert_eq!(p.proposal_count().unwrap().to_usize().unwrap(), half, "{s}");
            for w in brute_force_walks(&s, n, Region::Quadrant).unwrap() {
                assert!(w.positions().iter().all(|&(x, y)| r.contains(x, y)));
            }
        }
    }

    #[test]
    fn deterministic_and_parallel_agnostic() {
        let p = plan_for(&presets::reluctant_six(), 40);
        let a = sample_many(&p, 3, 7, false).unwrap();
        let b = sample_many(&p, 3, 7, true).unwrap();
        for ((wa, sa), (wb, sb)) in a.iter().zip(&b) {
            assert_eq!(wa, wb);
            assert_eq!(sa.trials, sb.trials);
            assert!(in_quadrant(wa, Endpoint::Any));
            assert_eq!(wa.len(), 40);
        }
        let c = sample_indexed(&p, 7, 1, true).unwrap();
        assert_eq!(c.0, a[1].0);
    }

    #[test]
    fn excursions_end_at_origin() {
        let s = presets::simple();
        let cfg = PipelineConfig { endpoint: Endpoint::Origin, ..Default::default() };
        let p = plan(&s, 8, &cfg).unwrap();
        assert_eq!(p.nonterminal(), Nonterminal::D);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let (w, _) = sample_quadrant(&p, &mut rng).unwrap();
            assert_eq!(w.endpoint(), (0, 0));
        }
        let q = quadrant_counts(&s, 8, Endpoint::Origin);
        assert_eq!(q.values[8].to_usize().unwrap(), brute_force_walks(&s, 8, Region::Quadrant)
            .unwrap()
            .iter()
            .filter(|w| w.endpoint() == (0, 0))
            .count());
    }

    #[test]
    fn trial_cap_is_reported() {
        let cfg = PipelineConfig { trial_cap: 1, endpoint: Endpoint::Origin, ..Default::default() };
        let p = plan(&presets::reluctant_six(), 30, &cfg).unwrap();
        let mut found_cap = false;
        for seed in 0..20 {
            if let Err(e) = sample_indexed(&p, seed, 0, false) {
                assert!(matches!(e, Error::TrialCap { cap: 1, .. }));
                assert_eq!(e.exit_code(), 3);
                found_cap = true;
            }
        }
        assert!(found_cap);
    }

    #[test]
    fn guided_backend_plans() {
        let cfg = PipelineConfig { backend: Backend::Guided, ..Default::default() };
        let p = plan(&presets::symmetric_reluctant(), 200, &cfg).unwrap();
        assert_eq!(p.backend(), Backend::Guided);
        let (w, st) = sample_indexed(&p, 11, 0, false).unwrap();
        assert_eq!(w.len(), 200);
        assert!(in_quadrant(&w, Endpoint::Any));
        assert!(st.trials >= 1);
    }

    #[test]
    fn trivial_model_is_refused() {
        let s = StepSet::parse("(-1,0);(0,-1)").unwrap();
        assert!(matches!(plan(&s, 5, &PipelineConfig::default()), Err(Error::Trivial(_))));
    }
}
