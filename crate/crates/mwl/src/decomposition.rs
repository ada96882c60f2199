//! Stopping-time decomposition of the multilinear level sets.
//!
//! The weak-type argument splits `{1 < 𝓜_d(f⃗)/v ≤ 2}` by the magnitude of
//! `v`, covers each super-level set `Ω_k = {𝓜_d > a^{mk}}` by maximal
//! stopping cubes, sorts those cubes into bands by the average of `v^{1/m}`,
//! filters the bands down to the cubes that actually meet the matching
//! `v`-level shell (the Γ family), and then runs principal-cube and packing
//! arguments over the result. This module materializes every one of those
//! objects as plain data so the chain can be audited piece by piece.
//!
//! Floating-point hygiene: level-set membership is decided by multiplicative
//! comparisons (`v < 𝓜 ≤ 2·v`, the doubling exact in binary), and every band
//! boundary `a^e` is a single `powi` call shared by both sides of each
//! comparison, so the audits below check the construction logic with exact
//! comparisons rather than tolerances. Cube products reuse the maximal
//! operator's own average path, which makes `Ω_k` and the union of its
//! stopping cubes agree float for float.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

use crate::grid::{DyadicCube, DyadicGrid, Mode, Prefix, StepFunction};
use crate::operators::{multilinear_maximal, Slots};
use crate::weights::{a1_constant, sup_scan, ConstantValue, Weight, WitnessInterval};
use crate::{Error, Result};

/// Parameters of the level-set ladder.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecompositionConfig {
    /// Base of the ladder; the one-dimensional stopping argument needs
    /// `a > 2` so that a parent average certifies the upper sandwich bound.
    pub a: f64,
    /// Optional clamp on the stopping levels `k` (inclusive). Levels outside
    /// the feasible window — where the root itself passes the stopping test
    /// or `Ω_k` is empty — are dropped regardless.
    pub k_range: Option<(i64, i64)>,
}

impl DecompositionConfig {
    pub fn new(a: f64) -> Result<Self> {
        if !(a > 2.0) || !a.is_finite() {
            return Err(Error::Config(format!(
                "level base must satisfy a > 2, got {a}"
            )));
        }
        Ok(DecompositionConfig { a, k_range: None })
    }
}

/// One maximal stopping cube together with its band bookkeeping.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ForestCube {
    pub cube: DyadicCube,
    /// Stopping level: the cube is maximal with `∏⟨f_i⟩ > a^{mk}`.
    pub k: i64,
    /// Band index: `a^{k+l} ≤ ⟨v^{1/m}⟩ < a^{k+l+1}`.
    pub l: i64,
    /// Whether the cube meets `{a^k < v^{1/m} ≤ a^{k+1}}` in a cell.
    pub in_gamma: bool,
    /// `∏_i ⟨f_i⟩` over the cube, the stopping statistic.
    pub prod_avg: f64,
    /// `⟨v^{1/m}⟩` over the cube, the banding statistic.
    pub v_root_avg: f64,
}

/// The stopping cubes and super-level set of one ladder rung.
#[derive(Clone, Debug, PartialEq)]
pub struct KLevel {
    pub k: i64,
    /// `a^{mk}`, the stopping threshold of this rung.
    pub threshold: f64,
    /// Sorted cells of `Ω_k = {𝓜_d(f⃗) > a^{mk}}`.
    pub omega: Vec<usize>,
    /// Maximal stopping cubes, sorted left to right.
    pub cubes: Vec<ForestCube>,
}

/// Cells of one `E_k`: the slice of the level set where
/// `a^{mk} < v ≤ a^{m(k+1)}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ESet {
    pub k: i64,
    pub cells: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct CubeForest {
    grid: DyadicGrid,
    pub a: f64,
    pub m: usize,
    /// Ladder rungs in ascending `k`, clamped to the feasible window.
    pub levels: Vec<KLevel>,
    /// `E_k` slices in ascending `k`, over every inhabited `v`-band.
    pub e_sets: Vec<ESet>,
    /// Sorted cells of `{v < 𝓜_d(f⃗) ≤ 2v}`.
    pub level_set: Vec<usize>,
}

#[inline]
fn pw(a: f64, e: i64) -> f64 {
    a.powi(e as i32)
}

/// The unique `k` with `a^{s·k} < x ≤ a^{s·(k+1)}`.
fn open_band(a: f64, s: i64, x: f64) -> i64 {
    let mut k = (x.ln() / (s as f64 * a.ln())).floor() as i64;
    while !(pw(a, s * k) < x) {
        k -= 1;
    }
    while !(x <= pw(a, s * (k + 1))) {
        k += 1;
    }
    k
}

/// The unique `e` with `a^e ≤ x < a^{e+1}`.
fn closed_band(a: f64, x: f64) -> i64 {
    let mut e = (x.ln() / a.ln()).floor() as i64;
    while !(pw(a, e) <= x) {
        e -= 1;
    }
    while !(x < pw(a, e + 1)) {
        e += 1;
    }
    e
}

/// Maximal dyadic cubes with `∏_i ⟨f_i⟩ > t`, sorted left to right, each
/// paired with its product average. Descends only where the test fails, so
/// every returned cube's ancestors all fail it.
fn stopping_cubes(slots: &Slots, grid: DyadicGrid, t: f64) -> Vec<(DyadicCube, f64)> {
    let n = grid.cell_count();
    let depth = grid.depth();
    let mut out = Vec::new();
    let mut stack = vec![DyadicCube::ROOT];
    while let Some(q) = stack.pop() {
        let span = n >> q.level;
        let start = q.index as usize * span;
        let g = slots.product_avg(start, start + span);
        if g > t {
            out.push((q, g));
        } else if q.level < depth {
            stack.push(DyadicCube { level: q.level + 1, index: 2 * q.index + 1 });
            stack.push(DyadicCube { level: q.level + 1, index: 2 * q.index });
        }
    }
    out.sort_by_key(|(q, _)| q.index as usize * (n >> q.level));
    out
}

/// Build the full ladder: level sets, maximal cubes, bands, Γ filtering, and
/// the `E_k` slices. Inputs must be nonnegative; the scan is dyadic by
/// construction.
pub fn build_forest(
    fs: &[StepFunction],
    v: &Weight,
    cfg: &DecompositionConfig,
) -> Result<CubeForest> {
    if !(cfg.a > 2.0) || !cfg.a.is_finite() {
        return Err(Error::Config(format!(
            "level base must satisfy a > 2, got {}",
            cfg.a
        )));
    }
    if fs.is_empty() {
        return Err(Error::Domain("need at least one input function".into()));
    }
    let grid = v.grid();
    if fs.iter().any(|f| f.grid() != grid) {
        return Err(Error::Domain("inputs live on different grids".into()));
    }
    if fs.iter().any(|f| f.values().iter().any(|&x| x < 0.0)) {
        return Err(Error::Domain(
            "stopping decomposition requires nonnegative inputs".into(),
        ));
    }
    let a = cfg.a;
    let m = fs.len();
    let n = grid.cell_count();

    let slots = Slots::new(fs);
    let md = multilinear_maximal(fs, Mode::Dyadic)?;
    let mdv = md.values();
    let vv = v.values();

    // The level set and its E_k slices, banded by the magnitude of v.
    let level_set: Vec<usize> =
        (0..n).filter(|&i| vv[i] < mdv[i] && mdv[i] <= 2.0 * vv[i]).collect();
    let mut e_map: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for &i in &level_set {
        e_map.entry(open_band(a, m as i64, vv[i])).or_default().push(i);
    }
    let e_sets: Vec<ESet> = e_map.into_iter().map(|(k, cells)| ESet { k, cells }).collect();

    // Feasible stopping levels: the root must fail the test (so maximality
    // is certified by a parent everywhere) and Ω_k must be nonempty.
    let root_prod = slots.product_avg(0, n);
    let md_max = mdv.iter().cloned().fold(0.0f64, f64::max);
    let mut levels = Vec::new();
    if md_max > 0.0 {
        let s = m as i64;
        let k_lo = open_band(a, s, root_prod) + 1; // smallest k with a^{mk} >= root_prod
        let k_hi = open_band(a, s, md_max); // largest k with a^{mk} < md_max
        let (k_lo, k_hi) = match cfg.k_range {
            Some((lo, hi)) => (k_lo.max(lo), k_hi.min(hi)),
            None => (k_lo, k_hi),
        };
        let vr = v.power(1.0 / m as f64)?;
        let vr_vals = vr.values().to_vec();
        let vr_prefix = Prefix::new(&vr_vals);
        levels = (k_lo..=k_hi)
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|k| {
                let t = pw(a, s * k);
                let mut omega = Vec::new();
                let mut cubes = Vec::new();
                for (q, g) in stopping_cubes(&slots, grid, t) {
                    let span = n >> q.level;
                    let start = q.index as usize * span;
                    omega.extend(start..start + span);
                    let va = vr_prefix.avg(start, start + span);
                    let l = closed_band(a, va) - k;
                    let glo = pw(a, k);
                    let ghi = pw(a, k + 1);
                    let in_gamma = (start..start + span)
                        .any(|i| glo < vr_vals[i] && vr_vals[i] <= ghi);
                    cubes.push(ForestCube { cube: q, k, l, in_gamma, prod_avg: g, v_root_avg: va });
                }
                KLevel { k, threshold: t, omega, cubes }
            })
            .collect();
    }

    Ok(CubeForest { grid, a, m, levels, e_sets, level_set })
}

impl CubeForest {
    pub fn grid(&self) -> DyadicGrid {
        self.grid
    }

    /// All Γ cubes across bands and levels, deduplicated and sorted.
    pub fn gamma_cubes(&self) -> Vec<DyadicCube> {
        let set: BTreeSet<DyadicCube> = self
            .levels
            .iter()
            .flat_map(|lv| lv.cubes.iter().filter(|c| c.in_gamma).map(|c| c.cube))
            .collect();
        set.into_iter().collect()
    }

    /// The Γ cubes of one band `l`, deduplicated across `k`.
    pub fn gamma_band(&self, l: i64) -> Vec<DyadicCube> {
        let set: BTreeSet<DyadicCube> = self
            .levels
            .iter()
            .flat_map(|lv| {
                lv.cubes
                    .iter()
                    .filter(move |c| c.in_gamma && c.l == l)
                    .map(|c| c.cube)
            })
            .collect();
        set.into_iter().collect()
    }

    /// Bands with at least one Γ cube, ascending.
    pub fn gamma_band_indices(&self) -> Vec<i64> {
        let set: BTreeSet<i64> = self
            .levels
            .iter()
            .flat_map(|lv| lv.cubes.iter().filter(|c| c.in_gamma).map(|c| c.l))
            .collect();
        set.into_iter().collect()
    }

    /// Cube counts per `(l, k)`, the summary the CLI emits.
    pub fn band_counts(&self) -> BTreeMap<(i64, i64), usize> {
        let mut counts = BTreeMap::new();
        for lv in &self.levels {
            for c in &lv.cubes {
                *counts.entry((c.l, c.k)).or_insert(0) += 1;
            }
        }
        counts
    }

    /// Re-derive every structural invariant from the inputs and fail on the
    /// first violation. Comparisons against band boundaries are exact; the
    /// one measure identity (the `E_k` partition mass) is checked to 1e-12
    /// because regrouping a sum by bands may reassociate it.
    pub fn audit(&self, fs: &[StepFunction], v: &Weight, nu: &Weight) -> Result<Vec<String>> {
        let grid = self.grid;
        let n = grid.cell_count();
        let md = multilinear_maximal(fs, Mode::Dyadic)?;
        let mdv = md.values();
        let vv = v.values();
        let slots = Slots::new(fs);
        let vr = v.power(1.0 / self.m as f64)?;
        let vr_vals = vr.values();
        let mut passed = Vec::new();

        for lv in &self.levels {
            let t = lv.threshold;
            let recomputed: Vec<usize> = (0..n).filter(|&i| mdv[i] > t).collect();
            if recomputed != lv.omega {
                return Err(Error::Domain(format!(
                    "audit: Ω_{} does not match the super-level set of 𝓜_d",
                    lv.k
                )));
            }
            let mut covered = vec![false; n];
            for c in &lv.cubes {
                let cells = c.cube.cells(grid)?;
                for i in cells.clone() {
                    if covered[i] {
                        return Err(Error::Domain(format!(
                            "audit: overlapping stopping cubes at k={}",
                            lv.k
                        )));
                    }
                    covered[i] = true;
                }
                if !(c.prod_avg > t) {
                    return Err(Error::Domain(format!(
                        "audit: {} fails the stopping lower bound at k={}",
                        c.cube, lv.k
                    )));
                }
                let two_m = (1u64 << self.m) as f64;
                if !(c.prod_avg <= two_m * t) {
                    return Err(Error::Domain(format!(
                        "audit: {} breaks the sandwich upper bound at k={}",
                        c.cube, lv.k
                    )));
                }
                match c.cube.parent() {
                    Some(p) => {
                        let pc = p.cells(grid)?;
                        if slots.product_avg(pc.start, pc.end) > t {
                            return Err(Error::Domain(format!(
                                "audit: {} is not maximal at k={}",
                                c.cube, lv.k
                            )));
                        }
                    }
                    None => {
                        return Err(Error::Domain(format!(
                            "audit: root selected as stopping cube at k={}",
                            lv.k
                        )));
                    }
                }
                if !(pw(self.a, lv.k + c.l) <= c.v_root_avg
                    && c.v_root_avg < pw(self.a, lv.k + c.l + 1))
                {
                    return Err(Error::Domain(format!(
                        "audit: {} assigned the wrong band at k={}",
                        c.cube, lv.k
                    )));
                }
                let glo = pw(self.a, lv.k);
                let ghi = pw(self.a, lv.k + 1);
                let hit = c
                    .cube
                    .cells(grid)?
                    .any(|i| glo < vr_vals[i] && vr_vals[i] <= ghi);
                if hit != c.in_gamma {
                    return Err(Error::Domain(format!(
                        "audit: Γ membership of {} is wrong at k={}",
                        c.cube, lv.k
                    )));
                }
            }
            let union: Vec<usize> = (0..n).filter(|&i| covered[i]).collect();
            if union != lv.omega {
                return Err(Error::Domain(format!(
                    "audit: stopping cubes do not tile Ω_{}",
                    lv.k
                )));
            }
        }
        passed.push(format!(
            "levels: {} rungs tiled, sandwiched, maximal, banded",
            self.levels.len()
        ));

        // E_k slices: membership conditions, disjointness, coverage.
        let mut seen = vec![false; n];
        for es in &self.e_sets {
            let lo = pw(self.a, self.m as i64 * es.k);
            let hi = pw(self.a, self.m as i64 * (es.k + 1));
            for &i in &es.cells {
                if seen[i] {
                    return Err(Error::Domain(format!(
                        "audit: cell {i} appears in two E_k slices"
                    )));
                }
                seen[i] = true;
                if !(vv[i] < mdv[i] && mdv[i] <= 2.0 * vv[i]) {
                    return Err(Error::Domain(format!(
                        "audit: cell {i} of E_{} leaves the level set",
                        es.k
                    )));
                }
                if !(lo < vv[i] && vv[i] <= hi) {
                    return Err(Error::Domain(format!(
                        "audit: cell {i} of E_{} leaves its v-band",
                        es.k
                    )));
                }
                // Membership in Ω_k follows from the two strict comparisons
                // above; assert it literally against 𝓜_d.
                if !(mdv[i] > lo) {
                    return Err(Error::Domain(format!(
                        "audit: cell {i} of E_{} is outside Ω_{}",
                        es.k, es.k
                    )));
                }
            }
        }
        let union: Vec<usize> = (0..n).filter(|&i| seen[i]).collect();
        if union != self.level_set {
            return Err(Error::Domain(
                "audit: E_k slices do not partition the level set".into(),
            ));
        }
        passed.push(format!("E_k: {} slices partition the level set", self.e_sets.len()));

        // Mass check of the partition in the ν v^{1/m} measure.
        let density: Vec<f64> = nu
            .values()
            .iter()
            .zip(vr_vals)
            .map(|(&nv, &rv)| nv * rv)
            .collect();
        let h = grid.cell_width();
        let mass = |cells: &[usize]| -> f64 {
            let mut s = 0.0;
            for &i in cells {
                s += density[i] * h;
            }
            s
        };
        let total: f64 = self.e_sets.iter().map(|es| mass(&es.cells)).sum();
        let direct = mass(&self.level_set);
        if (total - direct).abs() > 1e-12 * direct.abs().max(1.0) {
            return Err(Error::Domain(format!(
                "audit: E_k masses sum to {total:.17e}, level set has {direct:.17e}"
            )));
        }
        passed.push("mass: Σ_k νv^{1/m}(E_k) matches the level set".into());
        Ok(passed)
    }
}

/// A principal (stopping-time) cube with its ν-average.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrincipalCube {
    pub cube: DyadicCube,
    pub nu_avg: f64,
}

/// Cell-wise verification of `Σ ⟨ν⟩_P χ_P ≤ 2[ν]_{A₁,d} ν`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CarlesonCheck {
    /// Dyadic `A₁` constant of ν entering the bound.
    pub a1_nu: f64,
    /// Largest observed `Σ ⟨ν⟩_P χ_P(x) / (2[ν]_{A₁,d} ν(x))`.
    pub max_ratio: f64,
    pub ok: bool,
}

/// The generations of principal cubes of one band, with the map from each
/// band cube to its tightest principal ancestor.
#[derive(Clone, Debug)]
pub struct PrincipalForest {
    pub l: i64,
    /// Generation 0 holds the maximal band cubes; each later generation's
    /// cubes more than double the ν-average of their stopping parents.
    pub generations: Vec<Vec<PrincipalCube>>,
    /// `(band cube, minimal principal cube containing it)` for every Γ cube
    /// of the band.
    pub pi: Vec<(DyadicCube, DyadicCube)>,
    pub carleson: CarlesonCheck,
}

impl PrincipalForest {
    /// The maximal collection: the coarsest generation.
    pub fn maximal(&self) -> &[PrincipalCube] {
        self.generations.first().map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn cube_count(&self) -> usize {
        self.generations.iter().map(Vec::len).sum()
    }
}

fn maximal_members(cubes: &[DyadicCube]) -> Vec<DyadicCube> {
    // Sorted input (level-major) guarantees containers precede members.
    let mut out: Vec<DyadicCube> = Vec::new();
    for q in cubes {
        if !out.iter().any(|p| p.contains(q)) {
            out.push(*q);
        }
    }
    out
}

/// Stopping-time selection over the Γ cubes of band `l`: generation 0 is the
/// maximal cubes; a cube joins the next generation when it is maximal among
/// those whose ν-average more than doubles its principal ancestor's. Also
/// verifies the Carleson bound cell by cell.
pub fn principal_cubes(forest: &CubeForest, nu: &Weight, l: i64) -> Result<PrincipalForest> {
    if nu.grid() != forest.grid {
        return Err(Error::Domain("ν lives on a different grid".into()));
    }
    let grid = forest.grid;
    let n = grid.cell_count();
    let family = forest.gamma_band(l);
    let prefix = Prefix::new(nu.values());
    let avg = |q: &DyadicCube| -> f64 {
        let span = n >> q.level;
        let start = q.index as usize * span;
        prefix.avg(start, start + span)
    };
    let a1_nu = a1_constant(nu, Mode::Dyadic).value;

    let mut generations: Vec<Vec<PrincipalCube>> = Vec::new();
    if !family.is_empty() {
        let gen0: Vec<PrincipalCube> = maximal_members(&family)
            .into_iter()
            .map(|cube| PrincipalCube { cube, nu_avg: avg(&cube) })
            .collect();
        generations.push(gen0);
        loop {
            let last = generations.last().unwrap();
            let mut next = Vec::new();
            for p in last {
                let cands: Vec<DyadicCube> = family
                    .iter()
                    .filter(|q| p.cube.contains(q) && **q != p.cube && avg(q) > 2.0 * p.nu_avg)
                    .copied()
                    .collect();
                for cube in maximal_members(&cands) {
                    next.push(PrincipalCube { cube, nu_avg: avg(&cube) });
                }
            }
            if next.is_empty() {
                break;
            }
            generations.push(next);
        }
    }

    // π: the deepest principal cube containing each band cube.
    let principals: Vec<PrincipalCube> = generations.iter().flatten().copied().collect();
    let mut pi = Vec::with_capacity(family.len());
    for q in &family {
        let anc = principals
            .iter()
            .filter(|p| p.cube.contains(q))
            .max_by_key(|p| p.cube.level)
            .expect("generation 0 covers every band cube");
        pi.push((*q, anc.cube));
    }

    // Carleson: the principal stack at each covered cell.
    let mut stack = vec![0.0f64; n];
    let mut covered = vec![false; n];
    for p in &principals {
        let span = n >> p.cube.level;
        let start = p.cube.index as usize * span;
        for i in start..start + span {
            stack[i] += p.nu_avg;
            covered[i] = true;
        }
    }
    let nuv = nu.values();
    let mut max_ratio = 0.0f64;
    let mut ok = true;
    for i in 0..n {
        if covered[i] {
            let bound = 2.0 * a1_nu * nuv[i];
            let r = stack[i] / bound;
            if r > max_ratio {
                max_ratio = r;
            }
            if !(stack[i] <= bound) {
                ok = false;
            }
        }
    }

    Ok(PrincipalForest {
        l,
        generations,
        pi,
        carleson: CarlesonCheck { a1_nu, max_ratio, ok },
    })
}

/// Carleson packing check of a cube family (each cube listed once):
/// `Λ = max_Q (Σ_{Q'⊆Q} |Q'|) / |Q|`, with the sparseness constant `η = 1/Λ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseReport {
    pub lambda: f64,
    pub eta: f64,
    pub pass: bool,
    pub cube_count: usize,
}

pub fn verify_sparse(family: &[DyadicCube], lambda_max: f64) -> SparseReport {
    let mut lambda = 0.0f64;
    for q in family {
        let inner: f64 = family.iter().filter(|p| q.contains(p)).map(|p| p.width()).sum();
        let ratio = inner / q.width();
        if ratio > lambda {
            lambda = ratio;
        }
    }
    let eta = if lambda > 0.0 { 1.0 / lambda } else { f64::INFINITY };
    SparseReport {
        lambda,
        eta,
        pass: lambda <= lambda_max,
        cube_count: family.len(),
    }
}

/// One band's worst relative `E_k` mass over its Γ cubes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub l: i64,
    pub max_ratio: f64,
    pub cube_count: usize,
}

/// Measured decay of `ν(E_k ∩ I)/ν(I)` across bands, with the log-linear
/// fit on the `l ≥ 0` branch and the geometric constant of the `l < 0`
/// branch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayTable {
    /// Ascending in `l`; ratios lie in `[0, 1]` (subset sums share the
    /// cell order of the full sums, so the quotient never rounds past 1).
    pub rows: Vec<DecayRow>,
    /// `ratio ≈ c1 e^{-c2 l}` fitted on nonzero `l ≥ 0` rows.
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub fit_points: usize,
    /// `max ratio / a^l` over nonzero `l < 0` rows.
    pub c1_neg: Option<f64>,
    /// Bands where the ratio grows against the expected trend by more than
    /// a factor of 4 (diagnostic only).
    pub trend_flags: Vec<String>,
}

pub fn measure_decay(forest: &CubeForest, nu: &Weight) -> Result<DecayTable> {
    if nu.grid() != forest.grid {
        return Err(Error::Domain("ν lives on a different grid".into()));
    }
    let grid = forest.grid;
    let n = grid.cell_count();
    let h = grid.cell_width();
    let nuv = nu.values();

    if forest.e_sets.is_empty() {
        return Ok(DecayTable {
            rows: Vec::new(),
            c1: None,
            c2: None,
            fit_points: 0,
            c1_neg: None,
            trend_flags: Vec::new(),
        });
    }
    let mut e_mask: BTreeMap<i64, Vec<bool>> = BTreeMap::new();
    for es in &forest.e_sets {
        let mask = e_mask.entry(es.k).or_insert_with(|| vec![false; n]);
        for &i in &es.cells {
            mask[i] = true;
        }
    }

    let mut per_band: BTreeMap<i64, (f64, usize)> = BTreeMap::new();
    for lv in &forest.levels {
        let empty;
        let mask: &[bool] = match e_mask.get(&lv.k) {
            Some(m) => m,
            None => {
                empty = vec![false; n];
                &empty
            }
        };
        for c in lv.cubes.iter().filter(|c| c.in_gamma) {
            let cells = c.cube.cells(grid)?;
            let mut inside = 0.0f64;
            let mut total = 0.0f64;
            for i in cells {
                let term = nuv[i] * h;
                if mask[i] {
                    inside += term;
                }
                total += term;
            }
            let ratio = inside / total;
            let entry = per_band.entry(c.l).or_insert((0.0, 0));
            entry.0 = entry.0.max(ratio);
            entry.1 += 1;
        }
    }
    let rows: Vec<DecayRow> = per_band
        .into_iter()
        .map(|(l, (max_ratio, cube_count))| DecayRow { l, max_ratio, cube_count })
        .collect();

    // Log-linear fit of the l >= 0 branch.
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.l >= 0 && r.max_ratio > 0.0)
        .map(|r| (r.l as f64, r.max_ratio.ln()))
        .collect();
    let (mut c1, mut c2) = (None, None);
    if pts.len() >= 2 {
        let sn = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let det = sn * sxx - sx * sx;
        if det > 0.0 {
            let slope = (sn * sxy - sx * sy) / det;
            let intercept = (sy - slope * sx) / sn;
            c1 = Some(intercept.exp());
            c2 = Some(-slope);
        }
    }
    let c1_neg = rows
        .iter()
        .filter(|r| r.l < 0 && r.max_ratio > 0.0)
        .map(|r| r.max_ratio / pw(forest.a, r.l))
        .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.max(x))));

    let mut trend_flags = Vec::new();
    let nonneg: Vec<&DecayRow> = rows.iter().filter(|r| r.l >= 0).collect();
    for pair in nonneg.windows(2) {
        if pair[1].max_ratio > 4.0 * pair[0].max_ratio && pair[0].max_ratio > 0.0 {
            trend_flags.push(format!(
                "band {} ratio {:.3e} grows past 4x band {} ratio {:.3e}",
                pair[1].l, pair[1].max_ratio, pair[0].l, pair[0].max_ratio
            ));
        }
    }

    Ok(DecayTable {
        rows,
        c1,
        c2,
        fit_points: pts.len(),
        c1_neg,
        trend_flags,
    })
}

/// `sup_Q ⟨w₁w₂⟩_Q / (⟨w₁⟩_Q ⟨w₂⟩_Q)`: how far the pair sits from splitting
/// averages multiplicatively. Equals 1 exactly when either factor is
/// constant, and is symmetric in its arguments.
pub fn lemma_rh_ratio(
    w1: &Weight,
    w2: &Weight,
    mode: Mode,
) -> Result<(f64, WitnessInterval)> {
    if w1.grid() != w2.grid() {
        return Err(Error::Domain("weights live on different grids".into()));
    }
    let p1 = Prefix::new(w1.values());
    let p2 = Prefix::new(w2.values());
    let prod: Vec<f64> = w1
        .values()
        .iter()
        .zip(w2.values())
        .map(|(&x, &y)| x * y)
        .collect();
    let p12 = Prefix::new(&prod);
    let ConstantValue { value, witness } = sup_scan(w1.grid(), mode, |a, b| {
        p12.avg(a, b) / (p1.avg(a, b) * p2.avg(a, b))
    });
    Ok((value, witness))
}
