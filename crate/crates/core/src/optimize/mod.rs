//! Maximization of the rate expressions over their auxiliary families.
//!
//! Every family is a product of probability simplices (one per row of each
//! free factor). Two strategies are available: seeded multi-start coordinate
//! ascent and exhaustive enumeration of a rational grid. Results come back as
//! a [`RateReport`] whose `best_factors` reproduce `best_bits` when fed back
//! to the [`bounds`](crate::bounds) evaluators.

mod families;
mod search;

pub use families::{FeedbackFamily, KgFamily, KgKind, OuterFamily, OuterKind, StateFamily};
pub use search::{ascend, grid_enumerate, grid_size, multi_start, random_start, Ascent, Family, SearchOutcome};

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bounds::{
    causal_state_rate, check_hypothesis, kg_cardinality_bounds, outer_cardinality_bounds, outer_secrecy_parallel,
    outer_sk_parallel, perfect_feedback_rate, rate_kg1, rate_kg2, sk_inner_rate, special_case_value,
    FactorizationKG, FactorizationOuter, HypothesisStatus, RateValue, SpecialCase, StateFactors,
};
use crate::channels::{embed_parallel, ParallelSourcesChannel, ProbeConfig, StateChannel, WtgfChannel};
use crate::error::{Error, Result};
use crate::probkit::JointPmf;

/// Search strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    RandomRestart,
    ExhaustiveGrid,
    /// Grid (when within budget) followed by multi-start ascent seeded with the grid optimum.
    Hybrid,
}

/// Requested auxiliary cardinalities; `None` means the default `min(bound, 3)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuxCaps {
    pub q: Option<usize>,
    pub u: Option<usize>,
    pub v: Option<usize>,
    pub t: Option<usize>,
}

/// Search settings. Defaults: 64 restarts, grid step 1/8, 200 sweeps,
/// improvement tolerance 1e-7, grid budget 10⁷ points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub seed: u64,
    pub restarts: usize,
    /// Grid step is `1 / grid_den`.
    pub grid_den: u32,
    pub max_sweeps: usize,
    pub improve_tol: f64,
    pub caps: AuxCaps,
    /// Use the full cardinality bounds instead of the capped defaults.
    pub full_caps: bool,
    pub mode: SearchMode,
    pub grid_budget: u128,
    /// Force `U = X` (or `U = Xc`).
    pub u_is_x: bool,
    pub probe: ProbeConfig,
    /// Assert the hypothesis of a special case instead of requiring it to be verified.
    pub assume_hypothesis: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            restarts: 64,
            grid_den: 8,
            max_sweeps: 200,
            improve_tol: 1e-7,
            caps: AuxCaps::default(),
            full_caps: false,
            mode: SearchMode::RandomRestart,
            grid_budget: 10_000_000,
            u_is_x: false,
            probe: ProbeConfig::default(),
            assume_hypothesis: false,
        }
    }
}

const DEFAULT_CAP: usize = 3;

impl SearchConfig {
    fn resolve(&self, name: &str, requested: Option<usize>, bound: Option<usize>, default: usize) -> Result<usize> {
        match (requested, bound) {
            (Some(0), _) => Err(Error::Argument(format!("cap for {name} must be at least 1"))),
            (Some(c), Some(b)) if c > b => Err(Error::Argument(format!("cap {c} for {name} exceeds its bound {b}"))),
            (Some(c), _) => Ok(c),
            (None, Some(b)) if self.full_caps => Ok(b),
            (None, Some(b)) => Ok(b.min(default)),
            (None, None) => Ok(default),
        }
    }
}

/// What a reported number is with respect to the quantity it estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundLabel {
    /// Inner bound: achieved by the reported factors.
    Achievable,
    /// Exact maximum over the rational grid.
    GridExact,
    /// Best value found by a non-exhaustive search; a lower estimate of the maximum.
    BestFound,
}

/// The maximizing auxiliary distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Factors {
    Kg(FactorizationKG),
    Outer(FactorizationOuter),
    InputJoint(JointPmf),
    State(StateFactors),
}

/// Which rate expression to maximize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    InnerKg,
    SkInner,
    OuterSecrecy,
    OuterSk,
    Thm5,
    Thm6,
    SpecialCase(SpecialCase),
}

/// Channel argument of [`maximize`].
#[derive(Debug, Clone, Copy)]
pub enum ChannelRef<'a> {
    Wtgf(&'a WtgfChannel),
    Parallel(&'a ParallelSourcesChannel),
    State(&'a StateChannel),
}

/// Result of a maximization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub objective: Objective,
    /// Best rate in bits; absent when no feasible point was found.
    pub best_bits: Option<f64>,
    pub value: RateValue,
    pub best_factors: Factors,
    /// Which branch of a multi-branch objective won.
    pub branch: Option<String>,
    pub evaluations: u64,
    pub per_restart_bests: Vec<f64>,
    pub label: BoundLabel,
    /// Cardinalities actually searched.
    pub caps: Vec<(String, usize)>,
    pub hypothesis: Option<HypothesisStatus>,
    /// Diagnostics only; excluded from reproducibility comparisons.
    pub wall_time_secs: f64,
}

impl RateReport {
    /// Re-evaluate the reported factors with the pointwise evaluators.
    pub fn recertify(&self, channel: ChannelRef<'_>) -> Result<RateValue> {
        let wtgf = |c: ChannelRef<'_>| -> Result<WtgfChannel> {
            match c {
                ChannelRef::Wtgf(w) => Ok(w.clone()),
                ChannelRef::Parallel(p) => Ok(embed_parallel(p)),
                ChannelRef::State(_) => Err(Error::Argument("objective needs a WTC-GF".into())),
            }
        };
        let parallel = |c: ChannelRef<'_>| match c {
            ChannelRef::Parallel(p) => Ok(p.clone()),
            _ => Err(Error::Argument("objective needs a parallel-sources channel".into())),
        };
        match (&self.objective, &self.best_factors) {
            (Objective::InnerKg, Factors::Kg(f)) => {
                let ch = wtgf(channel)?;
                if self.branch.as_deref() == Some("kg2") {
                    rate_kg2(&ch, f)
                } else {
                    rate_kg1(&ch, f)
                }
            }
            (Objective::SkInner, Factors::Kg(f)) => sk_inner_rate(&wtgf(channel)?, f),
            (Objective::OuterSecrecy, Factors::Outer(f)) => outer_secrecy_parallel(&parallel(channel)?, f),
            (Objective::OuterSk, Factors::Outer(f)) => outer_sk_parallel(&parallel(channel)?, f),
            (Objective::SpecialCase(c), Factors::Outer(f)) => special_case_value(*c, &parallel(channel)?, f),
            (Objective::Thm5, Factors::InputJoint(ux)) => perfect_feedback_rate(&wtgf(channel)?, ux),
            (Objective::Thm6, Factors::State(f)) => match channel {
                ChannelRef::State(sc) => causal_state_rate(sc, f),
                _ => Err(Error::Argument("objective needs a state channel".into())),
            },
            _ => Err(Error::Argument("report factors do not match its objective".into())),
        }
    }
}

fn run<F: Family>(family: &F, cfg: &SearchConfig) -> Result<SearchOutcome<F::Point>> {
    match cfg.mode {
        SearchMode::RandomRestart => multi_start(family, cfg, None),
        SearchMode::ExhaustiveGrid => grid_enumerate(family, cfg.grid_den, cfg.grid_budget),
        SearchMode::Hybrid => {
            let grid = match grid_enumerate(family, cfg.grid_den, cfg.grid_budget) {
                Ok(g) => Some(g),
                Err(Error::BudgetExceeded { .. }) => None,
                Err(e) => return Err(e),
            };
            let mut ms = multi_start(family, cfg, grid.as_ref().map(|g| g.rows.clone()))?;
            if let Some(g) = grid {
                ms.evaluations += g.evaluations;
                if g.value.search_score() > ms.value.search_score() {
                    return Ok(SearchOutcome {
                        evaluations: ms.evaluations,
                        per_restart_bests: ms.per_restart_bests,
                        grid_complete: false,
                        ..g
                    });
                }
            }
            Ok(ms)
        }
    }
}

struct Partial<P> {
    outcome: SearchOutcome<P>,
    branch: Option<String>,
}

fn better<P>(a: Partial<P>, b: Partial<P>) -> Partial<P> {
    // keeps `a` on ties
    let (sa, sb) = (a.outcome.value.search_score(), b.outcome.value.search_score());
    let evals = a.outcome.evaluations + b.outcome.evaluations;
    let mut bests = a.outcome.per_restart_bests.clone();
    bests.extend(&b.outcome.per_restart_bests);
    let grid = a.outcome.grid_complete && b.outcome.grid_complete;
    let mut win = if sb > sa { b } else { a };
    win.outcome.evaluations = evals;
    win.outcome.per_restart_bests = bests;
    win.outcome.grid_complete = grid;
    win
}

fn label_for(outer: bool, grid_complete: bool) -> BoundLabel {
    match (outer, grid_complete) {
        (_, true) => BoundLabel::GridExact,
        (true, false) => BoundLabel::BestFound,
        (false, false) => BoundLabel::Achievable,
    }
}

#[allow(clippy::too_many_arguments)]
fn finish<P>(
    objective: Objective,
    p: Partial<P>,
    wrap: impl FnOnce(P) -> Factors,
    outer: bool,
    caps: Vec<(String, usize)>,
    hypothesis: Option<HypothesisStatus>,
    started: Instant,
) -> RateReport {
    let o = p.outcome;
    RateReport {
        objective,
        best_bits: o.value.bits,
        label: label_for(outer, o.grid_complete),
        value: o.value,
        best_factors: wrap(o.point),
        branch: p.branch,
        evaluations: o.evaluations,
        per_restart_bests: o.per_restart_bests,
        caps,
        hypothesis,
        wall_time_secs: started.elapsed().as_secs_f64(),
    }
}

fn kg_caps(ch: &WtgfChannel, cfg: &SearchConfig) -> Result<[usize; 4]> {
    let b = kg_cardinality_bounds(ch);
    Ok([
        cfg.resolve("Q", cfg.caps.q, Some(b.q), DEFAULT_CAP)?,
        cfg.resolve("U", cfg.caps.u, Some(b.u), DEFAULT_CAP)?,
        cfg.resolve("V", cfg.caps.v, Some(b.v), DEFAULT_CAP)?,
        cfg.resolve("T", cfg.caps.t, Some(b.t), DEFAULT_CAP)?,
    ])
}

fn named(names: &[&str], values: &[usize]) -> Vec<(String, usize)> {
    names.iter().zip(values).map(|(n, v)| (n.to_string(), *v)).collect()
}

/// Largest KG secrecy rate: both strategies are searched, `Q` free for the
/// first and `Q = ∅` for the second, and the better one is reported.
pub fn maximize_inner_kg(ch: &WtgfChannel, cfg: &SearchConfig) -> Result<RateReport> {
    let started = Instant::now();
    let [q, u, v, t] = kg_caps(ch, cfg)?;
    let fam = |kind, q| KgFamily {
        ch,
        kind,
        q,
        u,
        v,
        t,
        u_is_x: cfg.u_is_x,
    };
    let one = Partial {
        outcome: run(&fam(KgKind::Kg1, q), cfg)?,
        branch: Some("kg1".into()),
    };
    let two = Partial {
        outcome: run(&fam(KgKind::Kg2, 1), cfg)?,
        branch: Some("kg2".into()),
    };
    let best = better(one, two);
    let u_eff = if cfg.u_is_x { ch.x().len() } else { u };
    Ok(finish(
        Objective::InnerKg,
        best,
        Factors::Kg,
        false,
        named(&["Q", "U", "V", "T"], &[q, u_eff, v, t]),
        None,
        started,
    ))
}

/// Largest secret-key inner-bound rate over feasible factors.
pub fn maximize_sk_inner(ch: &WtgfChannel, cfg: &SearchConfig) -> Result<RateReport> {
    let started = Instant::now();
    let [q, u, v, t] = kg_caps(ch, cfg)?;
    let fam = KgFamily {
        ch,
        kind: KgKind::SecretKey,
        q,
        u,
        v,
        t,
        u_is_x: cfg.u_is_x,
    };
    let best = Partial {
        outcome: run(&fam, cfg)?,
        branch: None,
    };
    let u_eff = if cfg.u_is_x { ch.x().len() } else { u };
    Ok(finish(
        Objective::SkInner,
        best,
        Factors::Kg,
        false,
        named(&["Q", "U", "V", "T"], &[q, u_eff, v, t]),
        None,
        started,
    ))
}

fn outer_run(
    ps: &ParallelSourcesChannel,
    kind: OuterKind,
    objective: Objective,
    cfg: &SearchConfig,
    used: (bool, bool),
    hypothesis: Option<HypothesisStatus>,
) -> Result<RateReport> {
    let started = Instant::now();
    let b = outer_cardinality_bounds(ps);
    let u = if used.0 { cfg.resolve("U", cfg.caps.u, Some(b.u), DEFAULT_CAP)? } else { 1 };
    let v = if used.1 { cfg.resolve("V", cfg.caps.v, Some(b.v), DEFAULT_CAP)? } else { 1 };
    let t = if used.1 { cfg.resolve("T", cfg.caps.t, Some(b.t), DEFAULT_CAP)? } else { 1 };
    let u_is_x = cfg.u_is_x && used.0;
    let fam = OuterFamily {
        ps,
        kind,
        u,
        v,
        t,
        u_is_x,
    };
    let best = Partial {
        outcome: run(&fam, cfg)?,
        branch: None,
    };
    let u_eff = if u_is_x { ps.xc().len() } else { u };
    Ok(finish(
        objective,
        best,
        Factors::Outer,
        true,
        named(&["U", "V", "T"], &[u_eff, v, t]),
        hypothesis,
        started,
    ))
}

/// Maximized secrecy outer bound of the parallel-sources model.
pub fn maximize_outer_secrecy(ps: &ParallelSourcesChannel, cfg: &SearchConfig) -> Result<RateReport> {
    outer_run(ps, OuterKind::Secrecy, Objective::OuterSecrecy, cfg, (true, true), None)
}

/// Maximized secret-key outer bound of the parallel-sources model.
pub fn maximize_outer_sk(ps: &ParallelSourcesChannel, cfg: &SearchConfig) -> Result<RateReport> {
    outer_run(ps, OuterKind::SecretKey, Objective::OuterSk, cfg, (true, true), None)
}

/// Closed-form capacity of a special case, maximized over its reduced family.
///
/// The hypothesis is checked first; a refuted hypothesis is an error unless
/// `cfg.assume_hypothesis` is set.
pub fn special_case_capacity(case: SpecialCase, ps: &ParallelSourcesChannel, cfg: &SearchConfig) -> Result<RateReport> {
    let status = check_hypothesis(case, ps, &cfg.probe, cfg.assume_hypothesis)?;
    outer_run(ps, OuterKind::Case(case), Objective::SpecialCase(case), cfg, case.uses(), Some(status))
}

/// Maximized perfect-feedback secrecy rate over `p(u, x)`. Default `|U| = 3`.
pub fn maximize_thm5(ch: &WtgfChannel, cfg: &SearchConfig) -> Result<RateReport> {
    let started = Instant::now();
    if !ch.has_output_feedback() {
        return Err(Error::Model("perfect output feedback needs Yhat = Y".into()));
    }
    let u = cfg.resolve("U", cfg.caps.u, None, DEFAULT_CAP)?;
    let fam = FeedbackFamily {
        ch,
        u,
        u_is_x: cfg.u_is_x,
    };
    let best = Partial {
        outcome: run(&fam, cfg)?,
        branch: None,
    };
    let u_eff = if cfg.u_is_x { ch.x().len() } else { u };
    Ok(finish(
        Objective::Thm5,
        best,
        Factors::InputJoint,
        false,
        named(&["U"], &[u_eff]),
        None,
        started,
    ))
}

/// Largest number of deterministic maps `u′(u, s)` enumerated for the first causal-state branch.
pub const MAP_BUDGET: u128 = 100_000;

/// Maximized causal-state secrecy rate: the better of the two strategies.
/// The first enumerates every map `u′(u, s)` with `|U′| = |U|`. Default `|U| = 2`.
pub fn maximize_thm6(sc: &StateChannel, cfg: &SearchConfig) -> Result<RateReport> {
    let started = Instant::now();
    let u = cfg.resolve("U", cfg.caps.u, None, 2)?;
    let ns = sc.s().len();
    let cells = u * ns;
    let n_maps = (u as u128).checked_pow(cells as u32).unwrap_or(u128::MAX);
    if n_maps > MAP_BUDGET {
        return Err(Error::BudgetExceeded {
            required: n_maps,
            budget: MAP_BUDGET,
        });
    }
    let per_map = SearchConfig {
        restarts: cfg.restarts.div_ceil(n_maps as usize).max(1),
        ..cfg.clone()
    };
    let mut best: Option<Partial<StateFactors>> = None;
    for m in 0..n_maps as usize {
        let map: Vec<usize> = (0..cells).map(|i| m / u.pow(i as u32) % u).collect();
        let fam = StateFamily { sc, u, map: Some(map) };
        let p = Partial {
            outcome: run(&fam, &per_map)?,
            branch: Some("branch1".into()),
        };
        best = Some(match best {
            None => p,
            Some(b) => better(b, p),
        });
    }
    let two = Partial {
        outcome: run(&StateFamily { sc, u, map: None }, cfg)?,
        branch: Some("branch2".into()),
    };
    let best = better(best.expect("at least one map"), two);
    Ok(finish(
        Objective::Thm6,
        best,
        Factors::State,
        false,
        named(&["U"], &[u]),
        None,
        started,
    ))
}

/// Dispatch on objective and channel kind. Parallel-sources channels are
/// embedded into a WTC-GF for the inner bounds.
pub fn maximize(objective: Objective, channel: ChannelRef<'_>, cfg: &SearchConfig) -> Result<RateReport> {
    let mismatch = || Error::Argument(format!("objective {objective:?} does not apply to this channel kind"));
    match (objective, channel) {
        (Objective::InnerKg, ChannelRef::Wtgf(ch)) => maximize_inner_kg(ch, cfg),
        (Objective::InnerKg, ChannelRef::Parallel(ps)) => maximize_inner_kg(&embed_parallel(ps), cfg),
        (Objective::SkInner, ChannelRef::Wtgf(ch)) => maximize_sk_inner(ch, cfg),
        (Objective::SkInner, ChannelRef::Parallel(ps)) => maximize_sk_inner(&embed_parallel(ps), cfg),
        (Objective::OuterSecrecy, ChannelRef::Parallel(ps)) => maximize_outer_secrecy(ps, cfg),
        (Objective::OuterSk, ChannelRef::Parallel(ps)) => maximize_outer_sk(ps, cfg),
        (Objective::SpecialCase(c), ChannelRef::Parallel(ps)) => special_case_capacity(c, ps, cfg),
        (Objective::Thm5, ChannelRef::Wtgf(ch)) => maximize_thm5(ch, cfg),
        (Objective::Thm6, ChannelRef::State(sc)) => maximize_thm6(sc, cfg),
        _ => Err(mismatch()),
    }
}
