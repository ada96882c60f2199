//! The lab's operators: maximal functions (linear and multilinear, dyadic or
//! over all grid-aligned intervals), a truncated multilinear Riesz-kernel
//! singular integral as the Calderón–Zygmund model, and the majorant-building
//! iteration `S`/`R`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::grid::{DyadicGrid, Mode, Prefix, StepFunction};
use crate::weights::Weight;
use crate::{Error, Result};

/// Average of `|f|` over cells `[a, b)`; single cells bypass the prefix sums
/// so that the finest-level average equals the cell value bit for bit (this
/// makes `maximal(f) >= |f|` pointwise exact).
#[inline]
fn slot_avg(prefix: &Prefix, vals: &[f64], a: usize, b: usize) -> f64 {
    if b - a == 1 {
        vals[a]
    } else {
        prefix.avg(a, b)
    }
}

pub(crate) struct Slots {
    abs: Vec<Vec<f64>>,
    prefixes: Vec<Prefix>,
}

impl Slots {
    pub(crate) fn new(fs: &[StepFunction]) -> Slots {
        let abs: Vec<Vec<f64>> = fs
            .iter()
            .map(|f| f.values().iter().map(|v| v.abs()).collect())
            .collect();
        let prefixes = abs.iter().map(|v| Prefix::new(v)).collect();
        Slots { abs, prefixes }
    }

    /// `prod_i <|f_i|>_[a,b)`.
    #[inline]
    pub(crate) fn product_avg(&self, a: usize, b: usize) -> f64 {
        let mut g = 1.0;
        for (p, vals) in self.prefixes.iter().zip(&self.abs) {
            g *= slot_avg(p, vals, a, b);
        }
        g
    }
}

/// `sup_{Q ∋ x} prod_i <|f_i|>_Q` at every cell, the supremum running over
/// dyadic cubes or over all grid-aligned intervals per `mode`.
///
/// The intervals scan is organized per left endpoint `a`: the averages for
/// growing right endpoints are folded right-to-left into a running maximum,
/// which yields every cell's best interval starting at `a` in one pass. Left
/// endpoints are independent and merge by exact element-wise maxima, so the
/// parallel reduction is order-insensitive.
pub fn multilinear_maximal(fs: &[StepFunction], mode: Mode) -> Result<StepFunction> {
    let slots = check_common_grid(fs)?;
    let grid = fs[0].grid();
    let n = grid.cell_count();
    let values = match mode {
        Mode::Dyadic => {
            let depth = grid.depth();
            (0..n)
                .map(|x| {
                    let mut best = f64::NEG_INFINITY;
                    for level in 0..=depth {
                        let span = n >> level;
                        let start = (x / span) * span;
                        let g = slots.product_avg(start, start + span);
                        if g > best {
                            best = g;
                        }
                    }
                    best
                })
                .collect()
        }
        Mode::Intervals => (0..n)
            .into_par_iter()
            .map(|a| {
                let mut contrib = vec![f64::NEG_INFINITY; n];
                let mut run = f64::NEG_INFINITY;
                for b in ((a + 1)..=n).rev() {
                    let g = slots.product_avg(a, b);
                    if g > run {
                        run = g;
                    }
                    contrib[b - 1] = run;
                }
                contrib
            })
            .reduce(
                || vec![f64::NEG_INFINITY; n],
                |mut acc, item| {
                    for (a, b) in acc.iter_mut().zip(item) {
                        if b > *a {
                            *a = b;
                        }
                    }
                    acc
                },
            ),
    };
    StepFunction::new(grid, values)
}

/// The one-slot maximal function `sup_{Q ∋ x} <|f|>_Q`.
pub fn maximal(f: &StepFunction, mode: Mode) -> StepFunction {
    multilinear_maximal(std::slice::from_ref(f), mode).expect("single slot always has a common grid")
}

fn check_common_grid(fs: &[StepFunction]) -> Result<Slots> {
    if fs.is_empty() {
        return Err(Error::Domain("need at least one input function".into()));
    }
    let grid = fs[0].grid();
    for f in &fs[1..] {
        if f.grid() != grid {
            return Err(Error::Domain("input functions live on different grids".into()));
        }
    }
    Ok(Slots::new(fs))
}

// ---------------------------------------------------------------------------
// Truncated multilinear Riesz-kernel transform
// ---------------------------------------------------------------------------

/// Truncation/quadrature parameters for [`multilinear_riesz`]. The kernel is
/// evaluated at cell midpoints; tuples whose Euclidean distance from the
/// diagonal point `(x, …, x)` is within `exclusion_radius` are dropped.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PVConfig {
    /// Which slot carries the kernel numerator `x - y_j` (1-based).
    pub component_j: usize,
    /// Hard exclusion radius around the singularity; must be at least one
    /// cell width so singular cells are excluded entirely.
    pub exclusion_radius: f64,
    /// Allow depths beyond [`riesz_depth_cap`]. The cost is `O(N^(m+1))`.
    pub override_cost_cap: bool,
}

impl PVConfig {
    /// Midpoint rule with the minimal legal radius (one cell width).
    pub fn for_grid(grid: DyadicGrid) -> PVConfig {
        PVConfig {
            component_j: 1,
            exclusion_radius: grid.cell_width(),
            override_cost_cap: false,
        }
    }
}

/// Largest grid depth at which the `O(N^(m+1))` transform stays under desk
/// runtime without an explicit override.
pub fn riesz_depth_cap(m: usize) -> u32 {
    match m {
        0 | 1 => 12,
        2 => 8,
        3 => 6,
        _ => 5,
    }
}

/// Midpoint-rule principal-value sum of the `m`-linear Riesz-type kernel
/// `K_j(x, y⃗) = (x - y_j) / (Σ_i (x - y_i)²)^((m+1)/2)`:
///
/// `T(f⃗)(x) = Σ_{y⃗ : |​(x,…,x) - y⃗| > radius} K_j(x̄, ȳ⃗) · prod_i f_i(y_i) · h^m`.
///
/// Cells where every slot vanishes are skipped (their terms are exact
/// zeros), so indicator-type inputs run far below the worst-case cost.
pub fn multilinear_riesz(fs: &[StepFunction], cfg: &PVConfig) -> Result<StepFunction> {
    check_common_grid(fs)?;
    let grid = fs[0].grid();
    let m = fs.len();
    if cfg.component_j == 0 || cfg.component_j > m {
        return Err(Error::Config(format!(
            "kernel component {} out of range 1..={m}",
            cfg.component_j
        )));
    }
    let h = grid.cell_width();
    if !(cfg.exclusion_radius >= h) || !cfg.exclusion_radius.is_finite() {
        return Err(Error::Config(format!(
            "exclusion radius {} is below one cell width {h}",
            cfg.exclusion_radius
        )));
    }
    if grid.depth() > riesz_depth_cap(m) && !cfg.override_cost_cap {
        return Err(Error::CostCap(format!(
            "depth {} exceeds the cap {} for m = {m}; pass the override to accept O(N^{}) cost",
            grid.depth(),
            riesz_depth_cap(m),
            m + 1
        )));
    }

    let n = grid.cell_count();
    let supports: Vec<Vec<usize>> = fs
        .iter()
        .map(|f| (0..n).filter(|&i| f.value(i) != 0.0).collect())
        .collect();
    if supports.iter().any(|s| s.is_empty()) {
        return StepFunction::constant(grid, 0.0);
    }
    let mids: Vec<f64> = (0..n).map(|i| grid.cell_midpoint(i)).collect();
    let sup_mids: Vec<Vec<f64>> = supports
        .iter()
        .map(|s| s.iter().map(|&i| mids[i]).collect())
        .collect();
    let sup_vals: Vec<Vec<f64>> = supports
        .iter()
        .zip(fs)
        .map(|(s, f)| s.iter().map(|&i| f.value(i)).collect())
        .collect();
    let j = cfg.component_j - 1;
    let r2 = cfg.exclusion_radius * cfg.exclusion_radius;
    let half_power = m + 1;
    let hm = h.powi(m as i32);

    let values: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|xc| {
            let xm = mids[xc];
            let mut sum = 0.0;
            let mut idx = vec![0usize; m];
            'tuples: loop {
                let mut s = 0.0;
                let mut prod = 1.0;
                for (slot, &ii) in idx.iter().enumerate() {
                    let d = xm - sup_mids[slot][ii];
                    s += d * d;
                    prod *= sup_vals[slot][ii];
                }
                if s > r2 {
                    let dj = xm - sup_mids[j][idx[j]];
                    sum += dj / pow_half(s, half_power) * prod;
                }
                // Lexicographic odometer: last slot varies fastest.
                let mut slot = m;
                loop {
                    if slot == 0 {
                        break 'tuples;
                    }
                    slot -= 1;
                    idx[slot] += 1;
                    if idx[slot] < supports[slot].len() {
                        break;
                    }
                    idx[slot] = 0;
                }
            }
            sum * hm
        })
        .collect();
    StepFunction::new(grid, values)
}

/// `s^(k/2)` for positive `s` and small integer `k`.
#[inline]
fn pow_half(s: f64, k: usize) -> f64 {
    let whole = s.powi((k / 2) as i32);
    if k % 2 == 1 {
        whole * s.sqrt()
    } else {
        whole
    }
}

// ---------------------------------------------------------------------------
// Majorant iteration
// ---------------------------------------------------------------------------

/// `S h = M(h·ν)/ν` cell-wise. Its sup-norm grows by at most the `A_1`
/// constant of `ν` per application, which is what makes the geometric
/// series below converge.
pub fn rdf_s(h: &StepFunction, nu: &Weight, mode: Mode) -> Result<StepFunction> {
    let weighted = h.zip(nu.step(), |a, b| a * b)?;
    maximal(&weighted, mode).zip(nu.step(), |a, b| a / b)
}

/// Parameters of the majorant series: the normalizing constant `K0`
/// (recommended: `a1_constant(ν)`), the truncation length, and the Lorentz
/// exponent `r'` used by downstream norm checks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RdfConfig {
    pub k0: f64,
    pub series_terms: u32,
    pub r_prime: f64,
}

impl Default for RdfConfig {
    fn default() -> Self {
        RdfConfig { k0: 1.0, series_terms: 20, r_prime: 3.0 }
    }
}

/// Result of the truncated series `R h = Σ_{k=0}^{T} S^k h / (2K0)^k` with
/// its measured convergence diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RdfRun {
    pub r: StepFunction,
    pub k0: f64,
    pub series_terms: u32,
    pub r_prime: f64,
    /// Largest measured per-term sup-norm growth `sup S^{k+1}h / sup S^k h`.
    pub sup_ratio: f64,
    /// Sup-norm bound on everything the truncation dropped; infinite when
    /// the measured growth reaches `2K0`.
    pub tail_bound: f64,
    /// `sup S^(T+1)h / (2K0)^T`, the additive defect in the majorant
    /// inequality at finite truncation.
    pub tail_correction: f64,
    /// Raised when the measured growth ratio reaches `2K0`, i.e. the series
    /// is not observed to contract.
    pub contraction_warning: bool,
    /// `h ≤ R h` held at every cell (the `k = 0` term, exact).
    pub pointwise_lower_ok: bool,
    /// `S(R h) ≤ 2K0·R h + tail_bound` held at every cell.
    pub s_bound_ok: bool,
}

/// Runs the truncated majorant series on a nonnegative seed `h`.
///
/// Beyond the partial sum itself, one extra application of `S` is spent on
/// diagnostics: the measured growth ratio, the geometric bound on the
/// dropped tail, and direct verification of the two pointwise guarantees.
pub fn rdf_r(h: &StepFunction, nu: &Weight, cfg: &RdfConfig, mode: Mode) -> Result<RdfRun> {
    if h.values().iter().any(|&v| v < 0.0) {
        return Err(Error::Domain("majorant series needs a nonnegative seed".into()));
    }
    if !(cfg.k0 > 0.0) || !cfg.k0.is_finite() {
        return Err(Error::Config(format!("K0 must be positive, got {}", cfg.k0)));
    }
    if cfg.series_terms < 1 {
        return Err(Error::Config("series needs at least one term".into()));
    }
    if !(cfg.r_prime > 1.0) {
        return Err(Error::Config(format!("r' must exceed 1, got {}", cfg.r_prime)));
    }
    let two_k0 = 2.0 * cfg.k0;
    let t = cfg.series_terms;

    let mut r_values = h.values().to_vec();
    let mut term = h.clone();
    let mut sups = vec![h.max_abs()];
    let mut scale = 1.0;
    for _ in 1..=t {
        term = rdf_s(&term, nu, mode)?;
        sups.push(term.max_abs());
        scale /= two_k0;
        for (acc, &v) in r_values.iter_mut().zip(term.values()) {
            *acc += scale * v;
        }
    }
    let extra = rdf_s(&term, nu, mode)?;
    sups.push(extra.max_abs());

    let mut sup_ratio = 0.0f64;
    for k in 0..=t as usize {
        if sups[k] > 0.0 {
            sup_ratio = sup_ratio.max(sups[k + 1] / sups[k]);
        }
    }
    let contraction_warning = sup_ratio >= two_k0;
    let tail_correction = sups[t as usize + 1] / two_k0.powi(t as i32);
    let geometric = if contraction_warning {
        f64::INFINITY
    } else {
        sups[t as usize + 1] / two_k0.powi(t as i32 + 1) / (1.0 - sup_ratio / two_k0)
    };
    let tail_bound = geometric.max(tail_correction);

    let r = StepFunction::new(h.grid(), r_values)?;
    let pointwise_lower_ok = h.values().iter().zip(r.values()).all(|(a, b)| a <= b);
    let s_of_r = rdf_s(&r, nu, mode)?;
    let s_bound_ok = s_of_r
        .values()
        .iter()
        .zip(r.values())
        .all(|(s, rv)| *s <= (two_k0 * rv + tail_bound) * (1.0 + 1e-12));

    Ok(RdfRun {
        r,
        k0: cfg.k0,
        series_terms: t,
        r_prime: cfg.r_prime,
        sup_ratio,
        tail_bound,
        tail_correction,
        contraction_warning,
        pointwise_lower_ok,
        s_bound_ok,
    })
}
