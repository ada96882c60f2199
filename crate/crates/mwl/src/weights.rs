//! Positive weights on dyadic grids: generators and sharp grid-level
//! constants.
//!
//! A [`Weight`] is a step function bounded below by a positive floor. The
//! constants computed here are honest finite suprema over the interval
//! family selected by [`Mode`]: the `A_1` constant `sup_Q <w>_Q / min_Q w`,
//! the `A_p` constant `sup_Q <w>_Q <w^{-1/(p-1)}>_Q^{p-1}`, the
//! Fujii–Wilson `A_∞` constant `sup_Q (1/w(Q)) ∫_Q M(w χ_Q)`, the `RH_∞`
//! constant `sup_Q (max_Q w) / <w>_Q`, and the multilinear `A_1` constant
//! `sup_Q <nu>_Q^m * prod_i (min_Q w_i)^{-1}` with `nu` the geometric mean
//! of the vector. Every constant is reported together with an interval that
//! attains it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::grid::{DyadicGrid, Mode, Prefix, StepFunction};
use crate::{Error, Result};

/// Relative floor applied by generators when none is given: `1e-8 * max w`.
pub const DEFAULT_RELATIVE_FLOOR: f64 = 1e-8;

/// A strictly positive step function together with its guaranteed floor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Weight {
    step: StepFunction,
    floor: f64,
}

impl Weight {
    /// Wraps a step function whose values are all `>= floor > 0`.
    pub fn new(step: StepFunction, floor: f64) -> Result<Self> {
        if !(floor > 0.0) || !floor.is_finite() {
            return Err(Error::Domain(format!("weight floor must be positive, got {floor}")));
        }
        if let Some(bad) = step.values().iter().find(|&&v| v < floor) {
            return Err(Error::Domain(format!(
                "weight value {bad} lies below the floor {floor}"
            )));
        }
        Ok(Weight { step, floor })
    }

    /// Clamps raw values at `floor` (default `1e-8 * max`) and wraps them.
    pub fn from_raw(grid: DyadicGrid, raw: Vec<f64>, floor: Option<f64>) -> Result<Self> {
        let mx = raw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !mx.is_finite() || mx <= 0.0 {
            return Err(Error::Domain(format!(
                "weight values must have a positive finite maximum, got {mx}"
            )));
        }
        let floor = match floor {
            Some(f) => f,
            None => DEFAULT_RELATIVE_FLOOR * mx,
        };
        if !(floor > 0.0) {
            return Err(Error::Domain(format!("weight floor must be positive, got {floor}")));
        }
        let clamped: Vec<f64> = raw.into_iter().map(|v| v.max(floor)).collect();
        Weight::new(StepFunction::new(grid, clamped)?, floor)
    }

    /// The positive step function with no associated floor adjustment.
    pub fn from_positive(step: StepFunction) -> Result<Self> {
        let mn = step.values().iter().cloned().fold(f64::INFINITY, f64::min);
        Weight::new(step, mn)
    }

    pub fn one(grid: DyadicGrid) -> Weight {
        Weight {
            step: StepFunction::constant(grid, 1.0).expect("constant fits any grid"),
            floor: 1.0,
        }
    }

    pub fn step(&self) -> &StepFunction {
        &self.step
    }

    pub fn values(&self) -> &[f64] {
        self.step.values()
    }

    pub fn value(&self, cell: usize) -> f64 {
        self.step.value(cell)
    }

    pub fn grid(&self) -> DyadicGrid {
        self.step.grid()
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn scale(&self, c: f64) -> Result<Weight> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::Domain(format!("weight scale must be positive, got {c}")));
        }
        Weight::from_positive(self.step.map(|v| c * v)?)
    }

    /// Cell-wise product of two weights on the same grid.
    pub fn product(&self, other: &Weight) -> Result<Weight> {
        Weight::from_positive(self.step.zip(&other.step, |a, b| a * b)?)
    }

    /// Cell-wise reciprocal.
    pub fn inverse(&self) -> Result<Weight> {
        Weight::from_positive(self.step.map(|v| 1.0 / v)?)
    }

    /// Cell-wise power `w^s`, any real `s`.
    pub fn power(&self, s: f64) -> Result<Weight> {
        if !s.is_finite() {
            return Err(Error::Domain(format!("weight power exponent must be finite, got {s}")));
        }
        if s == 1.0 {
            return Ok(self.clone());
        }
        Weight::from_positive(self.step.map(|v| v.powf(s))?)
    }
}

/// A vector of weights on one grid together with its geometric mean `nu`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeightVector {
    components: Vec<Weight>,
    nu: Weight,
}

impl WeightVector {
    pub fn new(components: Vec<Weight>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Domain("weight vector needs at least one component".into()));
        }
        let grid = components[0].grid();
        for w in &components[1..] {
            if w.grid() != grid {
                return Err(Error::Domain("weight vector components live on different grids".into()));
            }
        }
        let nu = geometric_mean(&components)?;
        Ok(WeightVector { components, nu })
    }

    pub fn m(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Weight] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &Weight {
        &self.components[i]
    }

    /// The geometric mean `nu = prod_i w_i^{1/m}`.
    pub fn nu(&self) -> &Weight {
        &self.nu
    }

    pub fn grid(&self) -> DyadicGrid {
        self.components[0].grid()
    }
}

/// Cell-wise geometric mean; for a single component this is that component,
/// bit for bit.
fn geometric_mean(components: &[Weight]) -> Result<Weight> {
    if components.len() == 1 {
        return Ok(components[0].clone());
    }
    let grid = components[0].grid();
    let inv_m = 1.0 / components.len() as f64;
    let mut values = vec![1.0; grid.cell_count()];
    for w in components {
        for (acc, &v) in values.iter_mut().zip(w.values()) {
            *acc *= v.powf(inv_m);
        }
    }
    Weight::from_positive(StepFunction::new(grid, values)?)
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

/// Power weight `|x - center|^a` sampled by exact cell averages.
///
/// Each cell value is the closed-form mean of the density over the cell,
/// using the antiderivative `sign(u) |u|^{a+1} / (a+1)`, so refining the grid
/// never changes the integral over a fixed region. Requires `a > -1`
/// (integrability); values are clamped at `floor`.
pub fn gen_power(grid: DyadicGrid, a: f64, center: f64, floor: Option<f64>) -> Result<Weight> {
    if !(a > -1.0) || !a.is_finite() {
        return Err(Error::Domain(format!(
            "power-weight exponent must satisfy a > -1, got {a}"
        )));
    }
    if !center.is_finite() {
        return Err(Error::Domain(format!("power-weight center must be finite, got {center}")));
    }
    if a == 0.0 {
        return Ok(Weight::one(grid));
    }
    let anti = |u: f64| u.signum() * u.abs().powf(a + 1.0) / (a + 1.0);
    let h = grid.cell_width();
    let raw: Vec<f64> = (0..grid.cell_count())
        .map(|i| {
            let s = grid.cell_left(i);
            let e = s + h;
            (anti(e - center) - anti(s - center)) / h
        })
        .collect();
    Weight::from_raw(grid, raw, floor)
}

/// Dyadic martingale weight: start from `w ≡ 1` and multiply the two halves
/// of every cube above `levels` by `1 + beta` and `1 - beta`, the side chosen
/// by a seeded bit per cube. Cube averages at every level `<= levels` are
/// preserved, so the weight realizes the same function on any grid of depth
/// `>= levels`.
pub fn gen_martingale(grid: DyadicGrid, seed: u64, beta: f64, levels: u32) -> Result<Weight> {
    if !(0.0..1.0).contains(&beta) {
        return Err(Error::Domain(format!(
            "martingale increment must satisfy 0 <= beta < 1, got {beta}"
        )));
    }
    if levels > grid.depth() {
        return Err(Error::Domain(format!(
            "martingale levels {levels} exceed grid depth {}",
            grid.depth()
        )));
    }
    let n = grid.cell_count();
    let mut values = vec![1.0; n];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for level in 1..=levels {
        let parent_span = n >> (level - 1);
        let child_span = parent_span / 2;
        for parent in 0..(1usize << (level - 1)) {
            let plus_on_left: bool = rng.gen();
            let lo = parent * parent_span;
            let (lf, rf) = if plus_on_left {
                (1.0 + beta, 1.0 - beta)
            } else {
                (1.0 - beta, 1.0 + beta)
            };
            for v in &mut values[lo..lo + child_span] {
                *v *= lf;
            }
            for v in &mut values[lo + child_span..lo + parent_span] {
                *v *= rf;
            }
        }
    }
    Weight::from_positive(StepFunction::new(grid, values)?)
}

/// Cell-wise product of two generated weights, the factored route into the
/// `A_∞` class (take one factor with small `A_1` constant and one with small
/// `RH_∞` constant).
pub fn gen_ainf_factored(w1: &Weight, w2: &Weight) -> Result<Weight> {
    w1.product(w2)
}

// ---------------------------------------------------------------------------
// Constants
// ---------------------------------------------------------------------------

/// An interval witnessing a supremum, in the coordinates of its scan mode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WitnessInterval {
    Dyadic { level: u32, index: u64 },
    Cells { start: usize, end: usize },
}

impl fmt::Display for WitnessInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WitnessInterval::Dyadic { level, index } => write!(f, "dyadic({level},{index})"),
            WitnessInterval::Cells { start, end } => write!(f, "cells[{start},{end})"),
        }
    }
}

/// A computed constant with the interval attaining it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantValue {
    pub value: f64,
    pub witness: WitnessInterval,
}

/// Scans the interval family of `mode`, keeping the first maximizer in scan
/// order (coarse-to-fine for dyadic cubes, lexicographic for intervals).
pub(crate) fn sup_scan(
    grid: DyadicGrid,
    mode: Mode,
    mut f: impl FnMut(usize, usize) -> f64,
) -> ConstantValue {
    let n = grid.cell_count();
    let mut best = f64::NEG_INFINITY;
    let mut witness = WitnessInterval::Cells { start: 0, end: n };
    match mode {
        Mode::Dyadic => {
            for level in 0..=grid.depth() {
                let span = n >> level;
                for index in 0..(1u64 << level) {
                    let a = index as usize * span;
                    let v = f(a, a + span);
                    if v > best {
                        best = v;
                        witness = WitnessInterval::Dyadic { level, index };
                    }
                }
            }
        }
        Mode::Intervals => {
            for a in 0..n {
                for b in (a + 1)..=n {
                    let v = f(a, b);
                    if v > best {
                        best = v;
                        witness = WitnessInterval::Cells { start: a, end: b };
                    }
                }
            }
        }
    }
    ConstantValue { value: best, witness }
}

/// Sparse table answering range-minimum queries in O(1).
struct RangeMin {
    rows: Vec<Vec<f64>>,
}

impl RangeMin {
    fn new(values: &[f64]) -> RangeMin {
        let n = values.len();
        let mut rows = vec![values.to_vec()];
        let mut len = 1;
        while 2 * len <= n {
            let prev = rows.last().unwrap();
            let row: Vec<f64> = (0..=n - 2 * len).map(|i| prev[i].min(prev[i + len])).collect();
            rows.push(row);
            len *= 2;
        }
        RangeMin { rows }
    }

    #[inline]
    fn query(&self, a: usize, b: usize) -> f64 {
        let k = usize::BITS - 1 - (b - a).leading_zeros();
        let len = 1usize << k;
        self.rows[k as usize][a].min(self.rows[k as usize][b - len])
    }
}

/// Sparse table answering range-maximum queries in O(1).
struct RangeMax {
    rows: Vec<Vec<f64>>,
}

impl RangeMax {
    fn new(values: &[f64]) -> RangeMax {
        let n = values.len();
        let mut rows = vec![values.to_vec()];
        let mut len = 1;
        while 2 * len <= n {
            let prev = rows.last().unwrap();
            let row: Vec<f64> = (0..=n - 2 * len).map(|i| prev[i].max(prev[i + len])).collect();
            rows.push(row);
            len *= 2;
        }
        RangeMax { rows }
    }

    #[inline]
    fn query(&self, a: usize, b: usize) -> f64 {
        let k = usize::BITS - 1 - (b - a).leading_zeros();
        let len = 1usize << k;
        self.rows[k as usize][a].max(self.rows[k as usize][b - len])
    }
}

/// `A_1` constant: `sup_Q <w>_Q / min_Q w`.
pub fn a1_constant(w: &Weight, mode: Mode) -> ConstantValue {
    let prefix = Prefix::new(w.values());
    let mins = RangeMin::new(w.values());
    sup_scan(w.grid(), mode, |a, b| prefix.avg(a, b) / mins.query(a, b))
}

/// `RH_∞` constant: `sup_Q (max_Q w) / <w>_Q`.
pub fn rhinf_constant(w: &Weight, mode: Mode) -> ConstantValue {
    let prefix = Prefix::new(w.values());
    let maxs = RangeMax::new(w.values());
    sup_scan(w.grid(), mode, |a, b| maxs.query(a, b) / prefix.avg(a, b))
}

/// `A_p` constant for `p > 1`: `sup_Q <w>_Q <w^{-1/(p-1)}>_Q^{p-1}`.
pub fn ap_constant(w: &Weight, p: f64, mode: Mode) -> Result<ConstantValue> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::Domain(format!("A_p constant requires p > 1, got {p}")));
    }
    let prefix = Prefix::new(w.values());
    let sigma: Vec<f64> = w.values().iter().map(|&v| v.powf(-1.0 / (p - 1.0))).collect();
    let sigma_prefix = Prefix::new(&sigma);
    Ok(sup_scan(w.grid(), mode, |a, b| {
        prefix.avg(a, b) * sigma_prefix.avg(a, b).powf(p - 1.0)
    }))
}

/// Fujii–Wilson `A_∞` constant: `sup_Q (1/w(Q)) ∫_Q M(w χ_Q)`, the inner
/// maximal operator restricted to subintervals of `Q` drawn from the same
/// family as the outer supremum.
///
/// The dyadic scan costs `O(N log² N)`; the all-intervals scan maintains the
/// restricted maximal function incrementally as the right endpoint grows and
/// costs `O(N³)`, which is still comfortable at desk scale.
pub fn ainf_constant(w: &Weight, mode: Mode) -> ConstantValue {
    match mode {
        Mode::Dyadic => ainf_dyadic(w),
        Mode::Intervals => ainf_intervals(w),
    }
}

fn ainf_dyadic(w: &Weight) -> ConstantValue {
    let grid = w.grid();
    let depth = grid.depth();
    let n = grid.cell_count();
    let prefix = Prefix::new(w.values());
    let mut best = f64::NEG_INFINITY;
    let mut witness = WitnessInterval::Dyadic { level: 0, index: 0 };
    for level in 0..=depth {
        let span = n >> level;
        for index in 0..(1u64 << level) {
            let qa = index as usize * span;
            let qb = qa + span;
            let mut num = 0.0;
            for x in qa..qb {
                let mut m = f64::NEG_INFINITY;
                for l in level..=depth {
                    let sub = n >> l;
                    let start = (x / sub) * sub;
                    m = m.max(prefix.avg(start, start + sub));
                }
                num += m;
            }
            let v = num / prefix.sum(qa, qb);
            if v > best {
                best = v;
                witness = WitnessInterval::Dyadic { level, index };
            }
        }
    }
    ConstantValue { value: best, witness }
}

fn ainf_intervals(w: &Weight) -> ConstantValue {
    let grid = w.grid();
    let n = grid.cell_count();
    let prefix = Prefix::new(w.values());
    let mut best = f64::NEG_INFINITY;
    let mut witness = WitnessInterval::Cells { start: 0, end: n };
    let mut m = vec![0.0f64; n];
    for qa in 0..n {
        let mut sum_m = 0.0;
        let mut sum_w = 0.0;
        for qb in (qa + 1)..=n {
            let c = qb - 1;
            sum_w += w.value(c);
            // New admissible subintervals all end at qb; fold their averages
            // into the restricted maximal function as a running prefix max.
            let mut cur = f64::NEG_INFINITY;
            for (x, mx) in m.iter_mut().enumerate().take(qb).skip(qa) {
                cur = cur.max(prefix.avg(x, qb));
                if x == c {
                    *mx = cur;
                    sum_m += cur;
                } else if cur > *mx {
                    sum_m += cur - *mx;
                    *mx = cur;
                }
            }
            let v = sum_m / sum_w;
            if v > best {
                best = v;
                witness = WitnessInterval::Cells { start: qa, end: qb };
            }
        }
    }
    ConstantValue { value: best, witness }
}

/// The multilinear `A_1` quantity `sup_Q <nu>_Q^m * prod_i (min_Q w_i)^{-1}`
/// together with its `m`-th root.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultilinearA1 {
    pub value: f64,
    pub mth_root: f64,
    pub witness: WitnessInterval,
}

pub fn multilinear_a1_constant(wv: &WeightVector, mode: Mode) -> MultilinearA1 {
    let m = wv.m() as i32;
    let nu_prefix = Prefix::new(wv.nu().values());
    let mins: Vec<RangeMin> = wv.components().iter().map(|w| RangeMin::new(w.values())).collect();
    let cv = sup_scan(wv.grid(), mode, |a, b| {
        let mut v = nu_prefix.avg(a, b).powi(m);
        for t in &mins {
            v /= t.query(a, b);
        }
        v
    });
    MultilinearA1 {
        value: cv.value,
        mth_root: cv.value.powf(1.0 / m as f64),
        witness: cv.witness,
    }
}

/// One `A_p` entry of a [`ConstantsReport`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApEntry {
    pub p: f64,
    pub constant: ConstantValue,
}

/// All scalar constants of one weight under one scan mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport {
    pub provenance: String,
    pub depth: u32,
    pub mode: Mode,
    pub a1: ConstantValue,
    pub ainf: ConstantValue,
    pub rhinf: ConstantValue,
    pub ap: Vec<ApEntry>,
}

impl ConstantsReport {
    pub fn compute(w: &Weight, mode: Mode, ps: &[f64], provenance: &str) -> Result<ConstantsReport> {
        let mut ap = Vec::with_capacity(ps.len());
        for &p in ps {
            ap.push(ApEntry {
                p,
                constant: ap_constant(w, p, mode)?,
            });
        }
        Ok(ConstantsReport {
            provenance: provenance.to_string(),
            depth: w.grid().depth(),
            mode,
            a1: a1_constant(w, mode),
            ainf: ainf_constant(w, mode),
            rhinf: rhinf_constant(w, mode),
            ap,
        })
    }
}
