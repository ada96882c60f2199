//! Randomized counterexample search over the generator parameter space.
//!
//! [`fuzz`] samples full instances — weights, a target weight `v`, and short
//! indicator-sum test functions — from seeded generators, evaluates the
//! requested inequality on each, then hill-climbs from the best trials by
//! local perturbation (±10% on continuous parameters, one cell or level on
//! indicators). [`refinement_scan`] re-evaluates one instance across grid
//! depths, regenerating every input from its closed-form recipe at each
//! depth; a ratio curve that keeps growing under refinement is the search's
//! actual product, since any single-depth ratio is bounded for trivial
//! reasons.
//!
//! Everything is deterministic given the master seed: per-trial seeds come
//! from a counter-based derivation, so parallel and serial runs (and any
//! thread count) produce bit-identical results.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::grid::Mode;
use crate::inequalities::{InequalityReport, TheoremId};
use crate::instance::{run_instance, FunctionSpec, IndicatorSpec, InstanceSpec, WeightSpec};
use crate::{Error, Result};

/// Number of reports kept in [`SearchResult::top`], and the number of
/// hill-climb starts.
pub const TOP_K: usize = 5;

/// Hill-climb steps per start.
pub const CLIMB_STEPS: usize = 50;

/// Indicator centers tried for power-law weights.
const POWER_CENTERS: [f64; 3] = [0.0, 0.5, 1.0];

/// The parameter space one fuzzing run draws from, plus the master seed.
///
/// The space doubles as the reproduction manifest: running [`fuzz`] twice on
/// the same value yields bit-identical [`SearchResult`]s regardless of
/// thread count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub theorem: TheoremId,
    /// Number of function/weight slots.
    pub m: usize,
    /// Grid depth used for every trial evaluation.
    pub depth: u32,
    /// Depths for the best instance's refinement curve.
    pub depth_schedule: Vec<u32>,
    pub mode: Mode,
    /// Power-law exponent range, inside `(-1, 0]` so weights stay integrable.
    pub exponent_range: (f64, f64),
    /// Martingale cascade increment range, inside `[0, 0.95]`.
    pub beta_range: (f64, f64),
    /// Cascade depth is drawn from `1..=max_cascade_levels`.
    pub max_cascade_levels: u32,
    /// Allow product-form weights (cascade × power) as a factorization choice.
    pub allow_products: bool,
    /// Indicator coefficient range; a zero low end permits vanishing
    /// functions, which evaluate as degenerate trials.
    pub coeff_range: (f64, f64),
    /// Each test function is a sum of `1..=max_terms` scaled indicators.
    pub max_terms: usize,
    /// Indicator cube levels are drawn from `0..=max_level`.
    pub max_level: u32,
    /// Exponent for vector-valued instances.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    /// Trial budget; must be at least 1.
    pub budget: u64,
    pub master_seed: u64,
}

impl SearchSpace {
    /// A moderate default space for the given inequality.
    pub fn new(theorem: TheoremId, m: usize, master_seed: u64) -> SearchSpace {
        SearchSpace {
            theorem,
            m,
            depth: 7,
            depth_schedule: vec![5, 6, 7, 8],
            mode: Mode::Dyadic,
            exponent_range: (-0.8, 0.0),
            beta_range: (0.0, 0.5),
            max_cascade_levels: 4,
            allow_products: true,
            coeff_range: (0.25, 4.0),
            max_terms: 2,
            max_level: 4,
            r: if theorem == TheoremId::Vv42 { Some(2.0) } else { None },
            budget: 64,
            master_seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.budget == 0 {
            return Err(Error::Config("trial budget must be at least 1".into()));
        }
        if self.m == 0 {
            return Err(Error::Config("need at least one slot".into()));
        }
        let (elo, ehi) = self.exponent_range;
        if !(elo <= ehi && elo > -1.0 && ehi <= 0.0) {
            return Err(Error::Config(format!(
                "exponent range ({elo}, {ehi}) must sit inside (-1, 0]"
            )));
        }
        let (blo, bhi) = self.beta_range;
        if !(blo <= bhi && blo >= 0.0 && bhi <= 0.95) {
            return Err(Error::Config(format!(
                "beta range ({blo}, {bhi}) must sit inside [0, 0.95]"
            )));
        }
        let (clo, chi) = self.coeff_range;
        if !(clo <= chi && clo >= 0.0 && chi.is_finite()) {
            return Err(Error::Config(format!(
                "coefficient range ({clo}, {chi}) must be finite and nonnegative"
            )));
        }
        if self.max_terms == 0 || self.max_terms > 4 {
            return Err(Error::Config("max_terms must be in 1..=4".into()));
        }
        if self.max_cascade_levels == 0 {
            return Err(Error::Config("max_cascade_levels must be at least 1".into()));
        }
        let min_depth = self.depth_schedule.iter().copied().min().unwrap_or(self.depth);
        let usable = self.depth.min(min_depth);
        if self.max_level > usable || self.max_cascade_levels > usable {
            return Err(Error::Config(format!(
                "indicator level cap {} and cascade cap {} must not exceed the \
                 shallowest evaluation depth {usable}",
                self.max_level, self.max_cascade_levels
            )));
        }
        Ok(())
    }
}

/// One trial's flat record; `ratio` is `None` when the trial was degenerate
/// (both sides of the inequality vanished).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub trial: u64,
    pub seed: u64,
    pub depth: u32,
    pub ratio: Option<f64>,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    /// Canonical JSON of the sampled instance; replaying it through
    /// [`run_instance`] reproduces the trial exactly.
    pub params: String,
}

/// A ranked survivor: the instance recipe together with its report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopEntry {
    /// Index of the trial this entry started from.
    pub trial: u64,
    /// Derived per-trial seed, for standalone reproduction.
    pub seed: u64,
    pub spec: InstanceSpec,
    pub report: InequalityReport,
}

/// One depth of a refinement curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub depth: u32,
    pub ratio: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub degenerate: bool,
    /// Hypothesis constants, flattened to `weight.kind` keys.
    pub constants: BTreeMap<String, f64>,
}

/// Outcome of one fuzzing run. Serializes to the run's JSON artifact;
/// [`SearchResult::trial_csv`] renders the flat per-trial table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    /// The space that produced this result; rerunning [`fuzz`] on it
    /// reproduces the result bit for bit.
    pub space: SearchSpace,
    pub trials_run: u64,
    pub degenerate_trials: u64,
    /// Up to [`TOP_K`] raw trials, sorted by descending ratio.
    pub top: Vec<TopEntry>,
    /// The best instance after hill-climbing from the top trials.
    pub best: TopEntry,
    /// Refinement curve of `best` over the space's depth schedule.
    pub best_curve: Vec<ScanRow>,
    /// Every trial in trial order.
    pub rows: Vec<TrialRow>,
}

impl SearchResult {
    /// Flat `trial,ratio,depth,params` table; degenerate trials leave the
    /// ratio column empty. The params column holds the instance JSON,
    /// quoted per RFC 4180.
    pub fn trial_csv(&self) -> String {
        let mut out = String::from("trial,ratio,depth,params\n");
        for row in &self.rows {
            let ratio = match row.ratio {
                Some(r) => crate::io::format_float(r),
                None => String::new(),
            };
            out.push_str(&format!(
                "{},{},{},\"{}\"\n",
                row.trial,
                ratio,
                row.depth,
                row.params.replace('"', "\"\"")
            ));
        }
        out
    }
}

/// SplitMix64 finalizer; the standard avalanche step for counter-based
/// seeding.
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Counter-based seed derivation: a pure function of `(master, stream,
/// counter)`, so any execution order — serial, work-stolen, or sharded —
/// sees the same per-trial randomness.
pub(crate) fn derive_seed(master: u64, stream: u64, counter: u64) -> u64 {
    splitmix64(splitmix64(master ^ stream.wrapping_mul(0xA076_1D64_78BD_642F)) ^ counter)
}

fn sample_range(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.gen_range(lo..=hi)
    } else {
        lo
    }
}

fn sample_weight(rng: &mut ChaCha8Rng, space: &SearchSpace) -> WeightSpec {
    let kinds = if space.allow_products { 3 } else { 2 };
    match rng.gen_range(0..kinds) {
        0 => WeightSpec::Power {
            exponent: sample_range(rng, space.exponent_range),
            center: POWER_CENTERS[rng.gen_range(0..POWER_CENTERS.len())],
        },
        1 => WeightSpec::Martingale {
            seed: rng.gen(),
            beta: sample_range(rng, space.beta_range),
            levels: rng.gen_range(1..=space.max_cascade_levels),
        },
        _ => WeightSpec::Product {
            factors: vec![
                WeightSpec::Martingale {
                    seed: rng.gen(),
                    beta: sample_range(rng, space.beta_range),
                    levels: rng.gen_range(1..=space.max_cascade_levels),
                },
                WeightSpec::Power {
                    exponent: sample_range(rng, space.exponent_range),
                    center: POWER_CENTERS[rng.gen_range(0..POWER_CENTERS.len())],
                },
            ],
        },
    }
}

fn sample_function(rng: &mut ChaCha8Rng, space: &SearchSpace) -> FunctionSpec {
    let terms = (0..rng.gen_range(1..=space.max_terms))
        .map(|_| {
            let coeff = sample_range(rng, space.coeff_range);
            let level = rng.gen_range(0..=space.max_level);
            let index = rng.gen_range(0..(1u64 << level));
            (coeff, IndicatorSpec::Cube { level, index })
        })
        .collect();
    FunctionSpec { terms }
}

fn sample_spec(rng: &mut ChaCha8Rng, space: &SearchSpace) -> InstanceSpec {
    let fs = (0..space.m).map(|_| sample_function(rng, space)).collect();
    let weights = (0..space.m).map(|_| sample_weight(rng, space)).collect();
    let v = sample_weight(rng, space);
    let mut spec = InstanceSpec::new(space.theorem, fs, weights, v);
    spec.r = space.r;
    spec
}

/// Nudge a continuous parameter by ±10%, clamped to its range. Zero values
/// step by a tenth of the range width instead, so the knob cannot die.
fn nudge(value: f64, (lo, hi): (f64, f64), up: bool, scale: f64) -> f64 {
    let step = if value != 0.0 { value.abs() * 0.1 } else { (hi - lo).max(scale) * 0.1 };
    let moved = if up { value + step } else { value - step };
    moved.clamp(lo, hi)
}

fn mutate_weight(w: &mut WeightSpec, rng: &mut ChaCha8Rng, space: &SearchSpace) {
    match w {
        WeightSpec::Const { value } => {
            *value = nudge(*value, (1e-6, f64::MAX), rng.gen(), 1.0);
        }
        WeightSpec::Power { exponent, center } => {
            if rng.gen() {
                *exponent = nudge(*exponent, space.exponent_range, rng.gen(), 0.1);
            } else {
                let at = POWER_CENTERS.iter().position(|c| c == center).unwrap_or(0);
                *center = POWER_CENTERS[(at + 1) % POWER_CENTERS.len()];
            }
        }
        WeightSpec::Martingale { beta, levels, .. } => {
            if rng.gen() {
                *beta = nudge(*beta, space.beta_range, rng.gen(), 0.1);
            } else if rng.gen() && *levels < space.max_cascade_levels {
                *levels += 1;
            } else if *levels > 1 {
                *levels -= 1;
            }
        }
        WeightSpec::Product { factors } => {
            if !factors.is_empty() {
                let i = rng.gen_range(0..factors.len());
                mutate_weight(&mut factors[i], rng, space);
            }
        }
        WeightSpec::Inverse { inner } | WeightSpec::PowerOf { inner, .. } => {
            mutate_weight(inner, rng, space);
        }
    }
}

fn mutate_function(f: &mut FunctionSpec, rng: &mut ChaCha8Rng, space: &SearchSpace) {
    if f.terms.is_empty() {
        return;
    }
    let i = rng.gen_range(0..f.terms.len());
    let (coeff, set) = &mut f.terms[i];
    if rng.gen() {
        *coeff = nudge(*coeff, space.coeff_range, rng.gen(), 1.0);
        return;
    }
    match set {
        // Indicators move by one cell, or by one level keeping position.
        IndicatorSpec::Cube { level, index } => match rng.gen_range(0..4u8) {
            0 if *index + 1 < (1u64 << *level) => *index += 1,
            1 if *index > 0 => *index -= 1,
            2 if *level < space.max_level => {
                *level += 1;
                *index *= 2;
            }
            _ if *level > 0 => {
                *level -= 1;
                *index /= 2;
            }
            _ => {}
        },
        IndicatorSpec::FinestCell { anchor_level, anchor_index, .. } => {
            if rng.gen() && *anchor_index + 1 < (1u64 << *anchor_level) {
                *anchor_index += 1;
            } else if *anchor_index > 0 {
                *anchor_index -= 1;
            }
        }
    }
}

fn mutate(spec: &InstanceSpec, rng: &mut ChaCha8Rng, space: &SearchSpace) -> InstanceSpec {
    let mut out = spec.clone();
    let m = out.weights.len();
    let site = rng.gen_range(0..(2 * m + 1));
    if site < m {
        mutate_weight(&mut out.weights[site], rng, space);
    } else if site < 2 * m {
        mutate_function(&mut out.fs[site - m], rng, space);
    } else {
        mutate_weight(&mut out.v, rng, space);
    }
    out
}

/// Evaluate one spec, classifying degeneracy as `Ok(None)`.
fn try_run(
    spec: &InstanceSpec,
    depth: u32,
    mode: Mode,
) -> Result<Option<InequalityReport>> {
    match run_instance(spec, depth, mode, false) {
        Ok(report) if report.degenerate => Ok(None),
        Ok(report) => Ok(Some(report)),
        Err(Error::Degenerate(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Run the full randomized search: `budget` seeded trials, then a bounded
/// hill climb ([`TOP_K`] starts × [`CLIMB_STEPS`] steps, strict-improvement
/// accept) from the best trials, then a refinement scan of the winner.
///
/// Errors with [`Error::Degenerate`] when every trial degenerates, and
/// propagates cost-cap and configuration errors honestly.
pub fn fuzz(space: &SearchSpace) -> Result<SearchResult> {
    space.validate()?;

    struct Trial {
        row: TrialRow,
        candidate: Option<(InstanceSpec, InequalityReport)>,
    }

    let trials: Vec<Trial> = (0..space.budget)
        .into_par_iter()
        .map(|i| {
            let seed = derive_seed(space.master_seed, 1, i);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let spec = sample_spec(&mut rng, space);
            let params = spec.describe();
            let report = try_run(&spec, space.depth, space.mode)?;
            let (ratio, lhs, rhs) = match &report {
                Some(r) => (Some(r.ratio), Some(r.lhs), Some(r.rhs)),
                None => (None, None, None),
            };
            Ok(Trial {
                row: TrialRow { trial: i, seed, depth: space.depth, ratio, lhs, rhs, params },
                candidate: report.map(|r| (spec, r)),
            })
        })
        .collect::<Result<_>>()?;

    let degenerate_trials = trials.iter().filter(|t| t.candidate.is_none()).count() as u64;
    let mut survivors: Vec<TopEntry> = trials
        .iter()
        .filter_map(|t| {
            t.candidate.as_ref().map(|(spec, report)| TopEntry {
                trial: t.row.trial,
                seed: t.row.seed,
                spec: spec.clone(),
                report: report.clone(),
            })
        })
        .collect();
    if survivors.is_empty() {
        return Err(Error::Degenerate(format!(
            "all {} trials degenerated; widen the coefficient or level ranges",
            space.budget
        )));
    }
    // Deterministic ranking: ratio first, trial index as the tie-breaker.
    survivors.sort_by(|a, b| {
        b.report
            .ratio
            .partial_cmp(&a.report.ratio)
            .expect("finite ratios")
            .then(a.trial.cmp(&b.trial))
    });
    survivors.truncate(TOP_K);
    let top = survivors;

    // Hill climbs are independent given their derived seeds, so climbers
    // parallelize without affecting the outcome.
    let climbed: Vec<TopEntry> = top
        .par_iter()
        .enumerate()
        .map(|(k, start)| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(space.master_seed, 2, k as u64));
            let mut best = start.clone();
            for _ in 0..CLIMB_STEPS {
                let cand = mutate(&best.spec, &mut rng, space);
                if let Some(report) = try_run(&cand, space.depth, space.mode)? {
                    if report.ratio > best.report.ratio {
                        best.spec = cand;
                        best.report = report;
                    }
                }
            }
            Ok(best)
        })
        .collect::<Result<_>>()?;

    let best = climbed
        .iter()
        .max_by(|a, b| {
            a.report
                .ratio
                .partial_cmp(&b.report.ratio)
                .expect("finite ratios")
                .then(b.trial.cmp(&a.trial))
        })
        .expect("top is nonempty")
        .clone();

    let best_curve = refinement_scan(&best.spec, &space.depth_schedule, space.mode, false)?;

    Ok(SearchResult {
        space: space.clone(),
        trials_run: space.budget,
        degenerate_trials,
        top,
        best,
        best_curve,
        rows: trials.into_iter().map(|t| t.row).collect(),
    })
}

/// Re-evaluate one instance at each depth, regenerating all inputs from
/// their closed-form recipes — never by upsampling a coarse realization.
/// Singular-integral instances past the cost cap error unless overridden.
pub fn refinement_scan(
    spec: &InstanceSpec,
    depths: &[u32],
    mode: Mode,
    override_cost_cap: bool,
) -> Result<Vec<ScanRow>> {
    if depths.is_empty() {
        return Err(Error::Config("refinement scan needs at least one depth".into()));
    }
    depths
        .par_iter()
        .map(|&depth| {
            let report = run_instance(spec, depth, mode, override_cost_cap)?;
            let mut constants = BTreeMap::new();
            for (name, cr) in &report.hypothesis_constants {
                constants.insert(format!("{name}.a1"), cr.a1.value);
                constants.insert(format!("{name}.ainf"), cr.ainf.value);
                constants.insert(format!("{name}.rhinf"), cr.rhinf.value);
            }
            if let Some(ml) = &report.multilinear_a1 {
                constants.insert("vector.a1".into(), ml.value);
            }
            Ok(ScanRow {
                depth,
                ratio: report.ratio,
                lhs: report.lhs,
                rhs: report.rhs,
                degenerate: report.degenerate,
                constants,
            })
        })
        .collect()
}
