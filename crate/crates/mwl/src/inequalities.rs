//! Ratio checkers for the mixed weak-type inequalities.
//!
//! Each checker assembles the left- and right-hand sides of one inequality
//! shape, evaluates them exactly on the grid, and returns an
//! [`InequalityReport`] carrying the ratio, the threshold witnessing the
//! weak-norm supremum, and the full set of hypothesis constants of every
//! weight involved. No checker asserts a numeric bound — the inequalities
//! hold with unspecified constants, so the interesting output is how the
//! ratio moves under refinement and across hypothesis regimes, which the
//! search and scan layers consume.
//!
//! Embedded hypothesis constants are always computed with the dyadic scan:
//! the all-intervals Fujii–Wilson functional costs `O(N³)` and would dwarf
//! the checker itself at the depths the scans use. The `constants`
//! subcommand computes either scan on demand for a single weight.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::grid::{Mode, StepFunction};
use crate::norms::{lp_norm, weak_quasinorm, WeakValue};
use crate::operators::{maximal, multilinear_maximal, multilinear_riesz, PVConfig};
use crate::weights::{
    multilinear_a1_constant, ConstantsReport, MultilinearA1, Weight, WeightVector,
};
use crate::{Error, Result};

/// The inequality being checked.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TheoremId {
    /// `M(fv)/v` against `L^1(uv)`, both `u` and `v` from favorable families.
    #[serde(rename = "SAWYER_1_1")]
    Sawyer11,
    /// Same display, `v` from a broader family.
    #[serde(rename = "CMP_1_2")]
    Cmp12,
    /// Same display with the singular integral in place of `M`.
    #[serde(rename = "LOP_1_3")]
    Lop13,
    /// Product of single-slot maximals against `prod ||f_i||_{L^1(w_i)}`.
    #[serde(rename = "MAIN_1_4")]
    Main14,
    /// The one-supremum multilinear maximal against the same right side.
    #[serde(rename = "MAX_1_5")]
    Max15,
    /// The open variant: hypotheses on `v^{1/m}` alone.
    #[serde(rename = "CONJ_1_6")]
    Conj16,
    /// The singular-integral analogue of the multilinear bound.
    #[serde(rename = "MUCZO_1_7")]
    Muczo17,
    /// Singular integral under the product-of-classes hypothesis.
    #[serde(rename = "COR_1_8")]
    Cor18,
    /// Operator-to-maximal comparison in the same weak norm.
    #[serde(rename = "EXTRAP_A")]
    ExtrapA,
    /// Vector-valued (square-function style) aggregate of the above.
    #[serde(rename = "VV_4_2")]
    Vv42,
}

impl TheoremId {
    pub const ALL: [TheoremId; 10] = [
        TheoremId::Sawyer11,
        TheoremId::Cmp12,
        TheoremId::Lop13,
        TheoremId::Main14,
        TheoremId::Max15,
        TheoremId::Conj16,
        TheoremId::Muczo17,
        TheoremId::Cor18,
        TheoremId::ExtrapA,
        TheoremId::Vv42,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            TheoremId::Sawyer11 => "SAWYER_1_1",
            TheoremId::Cmp12 => "CMP_1_2",
            TheoremId::Lop13 => "LOP_1_3",
            TheoremId::Main14 => "MAIN_1_4",
            TheoremId::Max15 => "MAX_1_5",
            TheoremId::Conj16 => "CONJ_1_6",
            TheoremId::Muczo17 => "MUCZO_1_7",
            TheoremId::Cor18 => "COR_1_8",
            TheoremId::ExtrapA => "EXTRAP_A",
            TheoremId::Vv42 => "VV_4_2",
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TheoremId {
    type Err = Error;

    fn from_str(s: &str) -> Result<TheoremId> {
        TheoremId::ALL
            .iter()
            .copied()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown theorem id {s:?}; expected one of {}",
                    TheoremId::ALL.map(|t| t.as_str()).join(", ")
                ))
            })
    }
}

/// Which operator a report was computed with, echoed for reproducibility.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "operator", rename_all = "snake_case")]
pub enum OperatorConfig {
    Maximal,
    ProductOfMaximals,
    MultilinearMaximal,
    Riesz { pv: PVConfig },
    RieszVector { pv: PVConfig, r: f64 },
}

/// One evaluated inequality with everything needed to audit it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub theorem: TheoremId,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`; zero for degenerate (both-sides-zero) reports.
    pub ratio: f64,
    /// Threshold attaining the weak-norm supremum on the left side.
    pub witness_t: f64,
    /// Both sides vanished identically; the ratio carries no information.
    pub degenerate: bool,
    pub notes: Vec<String>,
    /// The vector condition constant, for multilinear checkers.
    pub multilinear_a1: Option<MultilinearA1>,
    /// Dyadic-scan constants of every weight entering the hypotheses.
    pub hypothesis_constants: BTreeMap<String, ConstantsReport>,
    /// Generator descriptors for the inputs; filled by the instance layer.
    pub input_provenance: String,
    pub grid_depth: u32,
    pub mode: Mode,
    pub operator_config: OperatorConfig,
}

fn constants_map(entries: &[(&str, &Weight)]) -> Result<BTreeMap<String, ConstantsReport>> {
    let mut map = BTreeMap::new();
    for (key, w) in entries {
        map.insert(key.to_string(), ConstantsReport::compute(w, Mode::Dyadic, &[], key)?);
    }
    Ok(map)
}

fn check_setup(fs: &[StepFunction], wv: &WeightVector, v: &Weight) -> Result<()> {
    if fs.len() != wv.m() {
        return Err(Error::Domain(format!(
            "{} input functions for {} weights",
            fs.len(),
            wv.m()
        )));
    }
    let grid = wv.grid();
    if v.grid() != grid || fs.iter().any(|f| f.grid() != grid) {
        return Err(Error::Domain("inputs live on different grids".into()));
    }
    Ok(())
}

/// `ν v^{1/m}`, the measure density on the weak side of the multilinear
/// inequalities.
fn side_density(wv: &WeightVector, v: &Weight) -> Result<Weight> {
    wv.nu().product(&v.power(1.0 / wv.m() as f64)?)
}

/// `prod_i M f_i`, multiplied in slot order so that it dominates the
/// one-supremum multilinear maximal float-for-float.
fn product_of_maximals(fs: &[StepFunction], mode: Mode) -> Result<StepFunction> {
    let mut acc = maximal(&fs[0], mode);
    for f in &fs[1..] {
        acc = acc.zip(&maximal(f, mode), |a, b| a * b)?;
    }
    Ok(acc)
}

fn weight_keys(wv: &WeightVector, v: &Weight) -> Vec<(String, Weight)> {
    let mut out: Vec<(String, Weight)> = wv
        .components()
        .iter()
        .enumerate()
        .map(|(i, w)| (format!("w_{}", i + 1), w.clone()))
        .collect();
    out.push(("nu".to_string(), wv.nu().clone()));
    out.push(("v".to_string(), v.clone()));
    out
}

struct SideInputs {
    density: Weight,
    p: f64,
    constants: BTreeMap<String, ConstantsReport>,
    ml: MultilinearA1,
}

fn multilinear_side(
    wv: &WeightVector,
    v: &Weight,
    extra: &[(&str, &Weight)],
) -> Result<SideInputs> {
    let density = side_density(wv, v)?;
    let mut entries: Vec<(String, Weight)> = weight_keys(wv, v);
    entries.push(("nu_v_1m".to_string(), density.clone()));
    for (k, w) in extra {
        entries.push((k.to_string(), (*w).clone()));
    }
    let refs: Vec<(&str, &Weight)> = entries.iter().map(|(k, w)| (k.as_str(), w)).collect();
    Ok(SideInputs {
        density,
        p: 1.0 / wv.m() as f64,
        constants: constants_map(&refs)?,
        ml: multilinear_a1_constant(wv, Mode::Dyadic),
    })
}

fn product_l1_rhs(fs: &[StepFunction], wv: &WeightVector) -> Result<f64> {
    let mut rhs = 1.0;
    for (f, w) in fs.iter().zip(wv.components()) {
        rhs *= lp_norm(f, w, 1.0)?;
    }
    Ok(rhs)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    theorem: TheoremId,
    lhs: WeakValue,
    rhs: f64,
    side: SideInputs,
    grid_depth: u32,
    mode: Mode,
    operator_config: OperatorConfig,
    notes: Vec<String>,
) -> Result<InequalityReport> {
    if rhs == 0.0 {
        return Err(Error::Degenerate(format!(
            "{theorem}: right-hand side vanished; some input is identically zero"
        )));
    }
    Ok(InequalityReport {
        theorem,
        lhs: lhs.value,
        rhs,
        ratio: lhs.value / rhs,
        witness_t: lhs.witness_t,
        degenerate: false,
        notes,
        multilinear_a1: Some(side.ml),
        hypothesis_constants: side.constants,
        input_provenance: String::new(),
        grid_depth,
        mode,
        operator_config,
    })
}

/// Product-of-maximals inequality: weak `L^{1/m,∞}(ν v^{1/m})` norm of
/// `prod_i M f_i / v` against `prod_i ||f_i||_{L^1(w_i)}`.
pub fn check_main(
    fs: &[StepFunction],
    wv: &WeightVector,
    v: &Weight,
    mode: Mode,
) -> Result<InequalityReport> {
    check_setup(fs, wv, v)?;
    let side = multilinear_side(wv, v, &[])?;
    let g = product_of_maximals(fs, mode)?.zip(v.step(), |a, b| a / b)?;
    let lhs = weak_quasinorm(&g, &side.density, side.p)?;
    let rhs = product_l1_rhs(fs, wv)?;
    finish(
        TheoremId::Main14,
        lhs,
        rhs,
        side,
        wv.grid().depth(),
        mode,
        OperatorConfig::ProductOfMaximals,
        Vec::new(),
    )
}

/// One-supremum multilinear maximal inequality, same sides as [`check_main`]
/// with `𝓜(f⃗)` in place of the product of maximals.
pub fn check_max(
    fs: &[StepFunction],
    wv: &WeightVector,
    v: &Weight,
    mode: Mode,
) -> Result<InequalityReport> {
    check_setup(fs, wv, v)?;
    let side = multilinear_side(wv, v, &[])?;
    let g = multilinear_maximal(fs, mode)?.zip(v.step(), |a, b| a / b)?;
    let lhs = weak_quasinorm(&g, &side.density, side.p)?;
    let rhs = product_l1_rhs(fs, wv)?;
    finish(
        TheoremId::Max15,
        lhs,
        rhs,
        side,
        wv.grid().depth(),
        mode,
        OperatorConfig::MultilinearMaximal,
        Vec::new(),
    )
}

/// Same computation as [`check_max`], labeled as the open variant: the
/// hypothesis set replaces control of `ν v^{1/m}` by control of `v^{1/m}`
/// alone, so the report additionally carries the constants of `v^{1/m}` for
/// gap-hunting. The ratio is evidence, not a verdict.
pub fn check_conjecture(
    fs: &[StepFunction],
    wv: &WeightVector,
    v: &Weight,
    mode: Mode,
) -> Result<InequalityReport> {
    check_setup(fs, wv, v)?;
    let v_root = v.power(1.0 / wv.m() as f64)?;
    let side = multilinear_side(wv, v, &[("v_1m", &v_root)])?;
    let g = multilinear_maximal(fs, mode)?.zip(v.step(), |a, b| a / b)?;
    let lhs = weak_quasinorm(&g, &side.density, side.p)?;
    let rhs = product_l1_rhs(fs, wv)?;
    finish(
        TheoremId::Conj16,
        lhs,
        rhs,
        side,
        wv.grid().depth(),
        mode,
        OperatorConfig::MultilinearMaximal,
        vec!["open target — no pass/fail".to_string()],
    )
}

/// Operator choice for the one-weight-pair (`m = 1`) inequalities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LinearOperator {
    Maximal,
    Riesz { pv: PVConfig },
}

/// The `m = 1` family: weak `L^{1,∞}(uv)` norm of `T(f·v)/v` against
/// `||f||_{L^1(uv)}`. Note the operator argument is `f·v`, not `f`.
pub fn check_linear(
    f: &StepFunction,
    u: &Weight,
    v: &Weight,
    op: LinearOperator,
    mode: Mode,
    theorem: TheoremId,
) -> Result<InequalityReport> {
    if !matches!(theorem, TheoremId::Sawyer11 | TheoremId::Cmp12 | TheoremId::Lop13) {
        return Err(Error::Config(format!(
            "{theorem} is not a one-weight-pair inequality"
        )));
    }
    if f.grid() != u.grid() || f.grid() != v.grid() {
        return Err(Error::Domain("inputs live on different grids".into()));
    }
    let fv = f.zip(v.step(), |a, b| a * b)?;
    let (t_of_fv, op_cfg) = match op {
        LinearOperator::Maximal => (maximal(&fv, mode), OperatorConfig::Maximal),
        LinearOperator::Riesz { pv } => (
            multilinear_riesz(std::slice::from_ref(&fv), &pv)?,
            OperatorConfig::Riesz { pv },
        ),
    };
    let g = t_of_fv.zip(v.step(), |a, b| a / b)?;
    let uv = u.product(v)?;
    let lhs = weak_quasinorm(&g, &uv, 1.0)?;
    let rhs = lp_norm(f, &uv, 1.0)?;
    if rhs == 0.0 {
        return Err(Error::Degenerate(format!(
            "{theorem}: right-hand side vanished; input function is identically zero"
        )));
    }
    let constants = constants_map(&[("u", u), ("v", v), ("uv", &uv)])?;
    Ok(InequalityReport {
        theorem,
        lhs: lhs.value,
        rhs,
        ratio: lhs.value / rhs,
        witness_t: lhs.witness_t,
        degenerate: false,
        notes: Vec::new(),
        multilinear_a1: None,
        hypothesis_constants: constants,
        input_provenance: String::new(),
        grid_depth: f.depth(),
        mode,
        operator_config: op_cfg,
    })
}

/// Singular-integral inequality: weak `L^{1/m,∞}(ν v^{1/m})` norm of
/// `|T(f⃗)|/v` against `prod_i ||f_i||_{L^1(w_i)}`. `theorem` selects the
/// hypothesis label (the two singular-integral statements share one
/// display). A vanishing right side flags the report degenerate instead of
/// failing: the cancellation-prone operator legitimately produces zero left
/// sides, and batch fuzzing needs those rows.
pub fn check_muczo(
    fs: &[StepFunction],
    wv: &WeightVector,
    v: &Weight,
    cfg: &PVConfig,
    mode: Mode,
    theorem: TheoremId,
) -> Result<InequalityReport> {
    if !matches!(theorem, TheoremId::Muczo17 | TheoremId::Cor18) {
        return Err(Error::Config(format!(
            "{theorem} is not a singular-integral inequality"
        )));
    }
    check_setup(fs, wv, v)?;
    let side = multilinear_side(wv, v, &[])?;
    let t = multilinear_riesz(fs, cfg)?;
    let g = t.zip(v.step(), |a, b| a / b)?;
    let lhs = weak_quasinorm(&g, &side.density, side.p)?;
    let rhs = product_l1_rhs(fs, wv)?;
    let op_cfg = OperatorConfig::Riesz { pv: *cfg };
    if rhs == 0.0 {
        return Ok(degenerate_report(
            theorem,
            side,
            wv.grid().depth(),
            mode,
            op_cfg,
            "some input slot is identically zero",
        ));
    }
    finish(theorem, lhs, rhs, side, wv.grid().depth(), mode, op_cfg, Vec::new())
}

/// Operator-to-maximal comparison: both sides are weak
/// `L^{1/m,∞}(ν v^{1/m})` norms, `|T(f⃗)|/v` on the left and `𝓜(f⃗)/v` on
/// the right.
pub fn check_extrapolation(
    fs: &[StepFunction],
    wv: &WeightVector,
    v: &Weight,
    cfg: &PVConfig,
    mode: Mode,
) -> Result<InequalityReport> {
    check_setup(fs, wv, v)?;
    let side = multilinear_side(wv, v, &[])?;
    let t = multilinear_riesz(fs, cfg)?;
    let g_op = t.zip(v.step(), |a, b| a / b)?;
    let g_max = multilinear_maximal(fs, mode)?.zip(v.step(), |a, b| a / b)?;
    let lhs = weak_quasinorm(&g_op, &side.density, side.p)?;
    let rhs = weak_quasinorm(&g_max, &side.density, side.p)?.value;
    let op_cfg = OperatorConfig::Riesz { pv: *cfg };
    if rhs == 0.0 {
        return Ok(degenerate_report(
            TheoremId::ExtrapA,
            side,
            wv.grid().depth(),
            mode,
            op_cfg,
            "maximal side vanished; some input slot is identically zero",
        ));
    }
    finish(
        TheoremId::ExtrapA,
        lhs,
        rhs,
        side,
        wv.grid().depth(),
        mode,
        op_cfg,
        Vec::new(),
    )
}

/// Vector-valued aggregate: left side is the weak norm of the `ℓ^r`
/// aggregate of `|T(f¹_{k_1}, …, f^m_{k_m})|/v` over all index tuples; right
/// side is the product over slots of `||(Σ_k |f^i_k|^r)^{1/r}||_{L^1(w_i)}`.
/// Requires `1 < r ≤ 2`. Single-member families bypass the `ℓ^r` powers so
/// the result reproduces [`check_muczo`] bit for bit.
pub fn check_vector_valued(
    families: &[Vec<StepFunction>],
    wv: &WeightVector,
    v: &Weight,
    r: f64,
    cfg: &PVConfig,
    mode: Mode,
) -> Result<InequalityReport> {
    if !(r > 1.0 && r <= 2.0) {
        return Err(Error::Domain(format!("aggregate exponent must lie in (1, 2], got {r}")));
    }
    if families.len() != wv.m() {
        return Err(Error::Domain(format!(
            "{} function families for {} weights",
            families.len(),
            wv.m()
        )));
    }
    if families.iter().any(|f| f.is_empty()) {
        return Err(Error::Domain("every slot needs at least one function".into()));
    }
    let grid = wv.grid();
    if v.grid() != grid || families.iter().flatten().any(|f| f.grid() != grid) {
        return Err(Error::Domain("inputs live on different grids".into()));
    }
    let tuples: usize = families.iter().map(|f| f.len()).product();
    if tuples > 64 {
        return Err(Error::Config(format!(
            "{tuples} operator tuples exceed the vector-valued budget of 64"
        )));
    }

    let side = multilinear_side(wv, v, &[])?;
    let n = grid.cell_count();
    let m = families.len();

    // ℓ^r aggregate of T over all tuples, lexicographic tuple order.
    let mut agg = vec![0.0f64; n];
    let mut idx = vec![0usize; m];
    let single = tuples == 1;
    'tuples: loop {
        let tuple: Vec<StepFunction> = idx
            .iter()
            .enumerate()
            .map(|(slot, &k)| families[slot][k].clone())
            .collect();
        let t = multilinear_riesz(&tuple, cfg)?;
        if single {
            for (a, &tv) in agg.iter_mut().zip(t.values()) {
                *a = tv.abs();
            }
        } else {
            for (a, &tv) in agg.iter_mut().zip(t.values()) {
                *a += tv.abs().powf(r);
            }
        }
        let mut slot = m;
        loop {
            if slot == 0 {
                break 'tuples;
            }
            slot -= 1;
            idx[slot] += 1;
            if idx[slot] < families[slot].len() {
                break;
            }
            idx[slot] = 0;
        }
    }
    if !single {
        for a in &mut agg {
            *a = a.powf(1.0 / r);
        }
    }
    let g = StepFunction::new(grid, agg)?.zip(v.step(), |a, b| a / b)?;
    let lhs = weak_quasinorm(&g, &side.density, side.p)?;

    let mut rhs = 1.0;
    for (family, w) in families.iter().zip(wv.components()) {
        let slot_agg = if family.len() == 1 {
            family[0].abs()
        } else {
            let mut acc = vec![0.0f64; n];
            for f in family {
                for (a, &fv) in acc.iter_mut().zip(f.values()) {
                    *a += fv.abs().powf(r);
                }
            }
            StepFunction::new(grid, acc)?.map(|a| a.powf(1.0 / r))?
        };
        rhs *= lp_norm(&slot_agg, w, 1.0)?;
    }

    let op_cfg = OperatorConfig::RieszVector { pv: *cfg, r };
    if rhs == 0.0 {
        return Ok(degenerate_report(
            TheoremId::Vv42,
            side,
            grid.depth(),
            mode,
            op_cfg,
            "some family is identically zero",
        ));
    }
    finish(TheoremId::Vv42, lhs, rhs, side, grid.depth(), mode, op_cfg, Vec::new())
}

fn degenerate_report(
    theorem: TheoremId,
    side: SideInputs,
    grid_depth: u32,
    mode: Mode,
    operator_config: OperatorConfig,
    why: &str,
) -> InequalityReport {
    InequalityReport {
        theorem,
        lhs: 0.0,
        rhs: 0.0,
        ratio: 0.0,
        witness_t: 0.0,
        degenerate: true,
        notes: vec![format!("degenerate: {why}")],
        multilinear_a1: Some(side.ml),
        hypothesis_constants: side.constants,
        input_provenance: String::new(),
        grid_depth,
        mode,
        operator_config,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::DyadicGrid;
    use crate::weights::{gen_martingale, gen_power};
    use proptest::prelude::*;

    fn grid(depth: u32) -> DyadicGrid {
        DyadicGrid::new(depth).unwrap()
    }

    fn ones(depth: u32, m: usize) -> (Vec<StepFunction>, WeightVector, Weight) {
        let g = grid(depth);
        let fs = vec![StepFunction::constant(g, 1.0).unwrap(); m];
        let wv = WeightVector::new(vec![Weight::one(g); m]).unwrap();
        (fs, wv, Weight::one(g))
    }

    fn sample_instance(depth: u32) -> (Vec<StepFunction>, WeightVector, Weight) {
        let g = grid(depth);
        let f1 = StepFunction::indicator_cells(g, 1..3).unwrap();
        let f2 = StepFunction::from_fn(g, |x| if x < 0.7 { 0.5 } else { 2.0 }).unwrap();
        let w1 = gen_power(g, -0.4, 0.0, None).unwrap();
        let w2 = gen_martingale(g, 5, 0.3, depth).unwrap();
        let wv = WeightVector::new(vec![w1, w2]).unwrap();
        let v = gen_power(g, 0.5, 1.0, None).unwrap();
        (vec![f1, f2], wv, v)
    }

    #[test]
    fn all_constant_inputs_give_ratio_one() {
        let (fs, wv, v) = ones(4, 2);
        for mode in [Mode::Dyadic, Mode::Intervals] {
            let main = check_main(&fs, &wv, &v, mode).unwrap();
            assert_eq!(main.ratio, 1.0);
            assert_eq!(main.lhs, 1.0);
            assert_eq!(main.rhs, 1.0);
            assert!(!main.degenerate);
            let max = check_max(&fs, &wv, &v, mode).unwrap();
            assert_eq!(max.ratio, 1.0);
        }
    }

    #[test]
    fn single_slot_whole_indicator_on_plain_measure() {
        let g = grid(3);
        let f = StepFunction::constant(g, 1.0).unwrap();
        let wv = WeightVector::new(vec![Weight::one(g)]).unwrap();
        let r = check_main(std::slice::from_ref(&f), &wv, &Weight::one(g), Mode::Dyadic).unwrap();
        assert_eq!(r.ratio, 1.0);
    }

    #[test]
    fn zero_input_is_a_degenerate_error_for_maximal_checkers() {
        let g = grid(3);
        let fs = vec![
            StepFunction::constant(g, 0.0).unwrap(),
            StepFunction::constant(g, 1.0).unwrap(),
        ];
        let wv = WeightVector::new(vec![Weight::one(g); 2]).unwrap();
        let v = Weight::one(g);
        assert!(matches!(check_main(&fs, &wv, &v, Mode::Dyadic), Err(Error::Degenerate(_))));
        assert!(matches!(check_max(&fs, &wv, &v, Mode::Dyadic), Err(Error::Degenerate(_))));
    }

    #[test]
    fn zero_input_flags_degenerate_for_singular_checkers() {
        let g = grid(4);
        let fs = vec![
            StepFunction::constant(g, 0.0).unwrap(),
            StepFunction::constant(g, 1.0).unwrap(),
        ];
        let wv = WeightVector::new(vec![Weight::one(g); 2]).unwrap();
        let v = Weight::one(g);
        let cfg = PVConfig::for_grid(g);
        let mu = check_muczo(&fs, &wv, &v, &cfg, Mode::Dyadic, TheoremId::Muczo17).unwrap();
        assert!(mu.degenerate);
        assert_eq!(mu.ratio, 0.0);
        let ex = check_extrapolation(&fs, &wv, &v, &cfg, Mode::Dyadic).unwrap();
        assert!(ex.degenerate);
    }

    #[test]
    fn max_lhs_never_exceeds_main_lhs() {
        let (fs, wv, v) = sample_instance(6);
        for mode in [Mode::Dyadic, Mode::Intervals] {
            let main = check_main(&fs, &wv, &v, mode).unwrap();
            let max = check_max(&fs, &wv, &v, mode).unwrap();
            assert!(
                max.lhs <= main.lhs,
                "mode {mode}: {} > {}",
                max.lhs,
                main.lhs
            );
            assert_eq!(max.rhs, main.rhs);
        }
    }

    #[test]
    fn conjecture_matches_max_on_identical_inputs() {
        let (fs, wv, v) = sample_instance(6);
        let max = check_max(&fs, &wv, &v, Mode::Dyadic).unwrap();
        let conj = check_conjecture(&fs, &wv, &v, Mode::Dyadic).unwrap();
        assert_eq!(conj.lhs, max.lhs);
        assert_eq!(conj.rhs, max.rhs);
        assert_eq!(conj.ratio, max.ratio);
        assert!(conj.notes.iter().any(|n| n.contains("open target")));
        assert!(conj.hypothesis_constants.contains_key("v_1m"));
        assert!(conj.hypothesis_constants.contains_key("nu_v_1m"));
    }

    #[test]
    fn linear_checker_agrees_with_main_at_m_one() {
        // v ≡ 1, u = w: the two pipelines compute the same floats.
        let g = grid(5);
        let f = StepFunction::from_fn(g, |x| if x < 0.3 { 3.0 } else { 0.2 }).unwrap();
        let w = gen_power(g, -0.5, 0.25, None).unwrap();
        let v = Weight::one(g);
        let wv = WeightVector::new(vec![w.clone()]).unwrap();
        for mode in [Mode::Dyadic, Mode::Intervals] {
            let main = check_main(std::slice::from_ref(&f), &wv, &v, mode).unwrap();
            let lin =
                check_linear(&f, &w, &v, LinearOperator::Maximal, mode, TheoremId::Sawyer11)
                    .unwrap();
            assert_eq!(main.lhs, lin.lhs, "mode {mode}");
            assert_eq!(main.rhs, lin.rhs);
            assert_eq!(main.ratio, lin.ratio);
        }
    }

    #[test]
    fn linear_checker_validates_theorem_choice() {
        let g = grid(3);
        let f = StepFunction::constant(g, 1.0).unwrap();
        let u = Weight::one(g);
        let v = Weight::one(g);
        assert!(matches!(
            check_linear(&f, &u, &v, LinearOperator::Maximal, Mode::Dyadic, TheoremId::Main14),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn singleton_families_reproduce_the_singular_checker() {
        let g = grid(5);
        let f1 = StepFunction::indicator_cells(g, 2..5).unwrap();
        let f2 = StepFunction::indicator_cells(g, 20..28).unwrap();
        let w1 = gen_power(g, -0.3, 0.0, None).unwrap();
        let w2 = gen_power(g, -0.2, 1.0, None).unwrap();
        let wv = WeightVector::new(vec![w1, w2]).unwrap();
        let v = gen_martingale(g, 9, 0.2, 5).unwrap();
        let cfg = PVConfig::for_grid(g);
        let mu = check_muczo(&[f1.clone(), f2.clone()], &wv, &v, &cfg, Mode::Dyadic, TheoremId::Muczo17)
            .unwrap();
        let vv =
            check_vector_valued(&[vec![f1], vec![f2]], &wv, &v, 2.0, &cfg, Mode::Dyadic).unwrap();
        assert_eq!(vv.lhs, mu.lhs);
        assert_eq!(vv.rhs, mu.rhs);
        assert_eq!(vv.ratio, mu.ratio);
    }

    #[test]
    fn vector_valued_validates_exponent_and_budget() {
        let g = grid(3);
        let f = StepFunction::constant(g, 1.0).unwrap();
        let wv = WeightVector::new(vec![Weight::one(g); 2]).unwrap();
        let v = Weight::one(g);
        let cfg = PVConfig::for_grid(g);
        let fam = vec![vec![f.clone()], vec![f.clone()]];
        assert!(check_vector_valued(&fam, &wv, &v, 1.0, &cfg, Mode::Dyadic).is_err());
        assert!(check_vector_valued(&fam, &wv, &v, 2.5, &cfg, Mode::Dyadic).is_err());
        let big = vec![vec![f.clone(); 9], vec![f.clone(); 9]];
        assert!(matches!(
            check_vector_valued(&big, &wv, &v, 2.0, &cfg, Mode::Dyadic),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn theorem_ids_round_trip_through_strings() {
        for t in TheoremId::ALL {
            let s = t.as_str();
            assert_eq!(s.parse::<TheoremId>().unwrap(), t);
            let json = serde_json::to_string(&t).unwrap();
            assert_eq!(json, format!("\"{s}\""));
        }
        assert!("THM_9_9".parse::<TheoremId>().is_err());
    }

    #[test]
    fn reports_embed_constants_for_every_hypothesis_weight() {
        let (fs, wv, v) = sample_instance(5);
        let r = check_max(&fs, &wv, &v, Mode::Dyadic).unwrap();
        for key in ["w_1", "w_2", "nu", "v", "nu_v_1m"] {
            assert!(r.hypothesis_constants.contains_key(key), "missing {key}");
        }
        assert!(r.multilinear_a1.unwrap().value >= 1.0);
        assert!(r.witness_t > 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn ratio_invariant_under_input_scaling(
            c1 in 0.05f64..20.0,
            c2 in 0.05f64..20.0,
            seed in 0u64..500,
        ) {
            let g = grid(5);
            let f1 = StepFunction::indicator_cells(g, 3..7).unwrap();
            let f2 = StepFunction::from_fn(g, |x| 1.0 + x).unwrap();
            let wv = WeightVector::new(vec![
                gen_martingale(g, seed, 0.25, 5).unwrap(),
                gen_power(g, -0.3, 0.5, None).unwrap(),
            ]).unwrap();
            let v = gen_power(g, 0.4, 0.0, None).unwrap();
            let base = check_main(&[f1.clone(), f2.clone()], &wv, &v, Mode::Dyadic).unwrap();
            let scaled = check_main(
                &[f1.map(|x| c1 * x).unwrap(), f2.map(|x| c2 * x).unwrap()],
                &wv,
                &v,
                Mode::Dyadic,
            ).unwrap();
            prop_assert!((scaled.ratio - base.ratio).abs() <= 1e-10 * base.ratio.abs());
        }

        #[test]
        fn ratio_invariant_under_weight_scaling(c in 0.1f64..10.0) {
            let g = grid(5);
            let fs = vec![
                StepFunction::indicator_cells(g, 0..2).unwrap(),
                StepFunction::indicator_cells(g, 8..16).unwrap(),
            ];
            let w1 = gen_power(g, -0.5, 0.0, None).unwrap();
            let w2 = gen_power(g, -0.2, 1.0, None).unwrap();
            let v = gen_power(g, 0.3, 0.5, None).unwrap();
            let wv = WeightVector::new(vec![w1.clone(), w2.clone()]).unwrap();
            let wv_scaled = WeightVector::new(vec![w1.scale(c).unwrap(), w2]).unwrap();
            let base = check_max(&fs, &wv, &v, Mode::Dyadic).unwrap();
            let scaled = check_max(&fs, &wv_scaled, &v, Mode::Dyadic).unwrap();
            prop_assert!((scaled.ratio - base.ratio).abs() <= 1e-10 * base.ratio.abs());
        }
    }
}
