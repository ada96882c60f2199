//! Depth-independent instance descriptions.
//!
//! A refinement scan re-evaluates one instance at several grid depths, so an
//! instance cannot be a fixed array of cell values: it is a recipe — power
//! laws, seeded martingale cascades, indicator sums — that realizes
//! coherently at any depth. The martingale generator draws per dyadic node,
//! so refining the grid extends a cascade instead of reshuffling it, and a
//! `FinestCell` indicator deliberately shrinks with the grid, which is what
//! couples an instance to the scan.

use serde::{Deserialize, Serialize};

use crate::grid::{DyadicGrid, Mode, StepFunction};
use crate::inequalities::{
    check_conjecture, check_extrapolation, check_linear, check_main, check_max, check_muczo,
    check_vector_valued, InequalityReport, LinearOperator, TheoremId,
};
use crate::norms::lp_norm;
use crate::operators::PVConfig;
use crate::weights::{gen_martingale, gen_power, Weight, WeightVector};
use crate::{Error, Result};

/// Recipe for one weight, realizable at any depth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightSpec {
    Const { value: f64 },
    /// `|x - center|^exponent`, cell-averaged in closed form.
    Power { exponent: f64, center: f64 },
    /// Seeded dyadic cascade with increment `beta` down `levels` levels.
    Martingale { seed: u64, beta: f64, levels: u32 },
    Product { factors: Vec<WeightSpec> },
    Inverse { inner: Box<WeightSpec> },
    PowerOf { inner: Box<WeightSpec>, exponent: f64 },
}

impl WeightSpec {
    pub fn realize(&self, grid: DyadicGrid) -> Result<Weight> {
        match self {
            WeightSpec::Const { value } => Weight::one(grid).scale(*value),
            WeightSpec::Power { exponent, center } => gen_power(grid, *exponent, *center, None),
            WeightSpec::Martingale { seed, beta, levels } => {
                gen_martingale(grid, *seed, *beta, *levels)
            }
            WeightSpec::Product { factors } => {
                if factors.is_empty() {
                    return Err(Error::Config("empty weight product".into()));
                }
                let mut acc = factors[0].realize(grid)?;
                for f in &factors[1..] {
                    acc = acc.product(&f.realize(grid)?)?;
                }
                Ok(acc)
            }
            WeightSpec::Inverse { inner } => inner.realize(grid)?.inverse(),
            WeightSpec::PowerOf { inner, exponent } => inner.realize(grid)?.power(*exponent),
        }
    }
}

/// One indicator region of a test function.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IndicatorSpec {
    /// A dyadic cube: the same physical interval at every depth.
    Cube { level: u32, index: u64 },
    /// The first (or last) finest-level cell of the anchor cube: a cell
    /// whose width halves with every refinement.
    FinestCell { anchor_level: u32, anchor_index: u64, last: bool },
}

/// A test function: a short sum of scaled indicators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionSpec {
    pub terms: Vec<(f64, IndicatorSpec)>,
}

impl FunctionSpec {
    pub fn cube(level: u32, index: u64) -> FunctionSpec {
        FunctionSpec { terms: vec![(1.0, IndicatorSpec::Cube { level, index })] }
    }

    pub fn finest(anchor_level: u32, anchor_index: u64, last: bool) -> FunctionSpec {
        FunctionSpec {
            terms: vec![(1.0, IndicatorSpec::FinestCell { anchor_level, anchor_index, last })],
        }
    }

    pub fn realize(&self, grid: DyadicGrid) -> Result<StepFunction> {
        if self.terms.is_empty() || self.terms.len() > 4 {
            return Err(Error::Config(format!(
                "function spec needs 1..=4 terms, got {}",
                self.terms.len()
            )));
        }
        let mut values = vec![0.0f64; grid.cell_count()];
        for (coeff, set) in &self.terms {
            match set {
                IndicatorSpec::Cube { level, index } => {
                    let cube = grid.cube(*level, *index)?;
                    for i in cube.cells(grid)? {
                        values[i] += coeff;
                    }
                }
                IndicatorSpec::FinestCell { anchor_level, anchor_index, last } => {
                    let cube = grid.cube(*anchor_level, *anchor_index)?;
                    let cells = cube.cells(grid)?;
                    let i = if *last { cells.end - 1 } else { cells.start };
                    values[i] += coeff;
                }
            }
        }
        StepFunction::new(grid, values)
    }
}

/// A complete, depth-independent description of one inequality evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub theorem: TheoremId,
    pub fs: Vec<FunctionSpec>,
    /// Slot weights; for the one-pair inequalities this is `[u]`.
    pub weights: Vec<WeightSpec>,
    pub v: WeightSpec,
    /// Rescale each `f_i` to unit `L¹(w_i)` mass after realization, making
    /// the report's ratio directly comparable across depths.
    pub normalize: bool,
    /// `ℓ^r` exponent for vector-valued instances.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    /// Extra functions per slot for vector-valued instances; slot `i` runs
    /// the family `[fs[i], extra_families[i]...]`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extra_families: Vec<Vec<FunctionSpec>>,
}

impl InstanceSpec {
    pub fn new(
        theorem: TheoremId,
        fs: Vec<FunctionSpec>,
        weights: Vec<WeightSpec>,
        v: WeightSpec,
    ) -> InstanceSpec {
        InstanceSpec {
            theorem,
            fs,
            weights,
            v,
            normalize: true,
            r: None,
            extra_families: Vec::new(),
        }
    }

    /// Compact provenance string carried into reports and manifests.
    pub fn describe(&self) -> String {
        serde_json::to_string(self).expect("instance specs serialize")
    }
}

/// `v` such that `ν v^{1/m}` realizes (up to rounding) the `target` weight:
/// `v = (target / ν)^m` with `ν = (∏ w_i)^{1/m}`. This is how hypothesis
/// regimes constrain the product weight directly.
pub fn v_spec_for_target(target: WeightSpec, weights: &[WeightSpec]) -> WeightSpec {
    let m = weights.len() as f64;
    let nu = WeightSpec::PowerOf {
        inner: Box::new(WeightSpec::Product { factors: weights.to_vec() }),
        exponent: 1.0 / m,
    };
    WeightSpec::PowerOf {
        inner: Box::new(WeightSpec::Product {
            factors: vec![target, WeightSpec::Inverse { inner: Box::new(nu) }],
        }),
        exponent: m,
    }
}

/// Realize and evaluate one instance at the given depth. Construction is
/// fully deterministic in `(spec, depth, mode)`.
pub fn run_instance(
    spec: &InstanceSpec,
    depth: u32,
    mode: Mode,
    override_cost_cap: bool,
) -> Result<InequalityReport> {
    let grid = DyadicGrid::new(depth)?;
    let m = spec.weights.len();
    if spec.fs.len() != m {
        return Err(Error::Config(format!(
            "{} functions for {} weights",
            spec.fs.len(),
            m
        )));
    }
    let weights: Vec<Weight> = spec
        .weights
        .iter()
        .map(|w| w.realize(grid))
        .collect::<Result<_>>()?;
    let v = spec.v.realize(grid)?;
    let mut fs: Vec<StepFunction> = spec
        .fs
        .iter()
        .map(|f| f.realize(grid))
        .collect::<Result<_>>()?;
    if spec.normalize {
        for (f, w) in fs.iter_mut().zip(&weights) {
            let norm = lp_norm(f, w, 1.0)?;
            if norm == 0.0 {
                return Err(Error::Degenerate(
                    "cannot normalize an identically zero function".into(),
                ));
            }
            *f = f.map(|x| x / norm)?;
        }
    }

    let mut pv = PVConfig::for_grid(grid);
    pv.override_cost_cap = override_cost_cap;

    let mut report = match spec.theorem {
        TheoremId::Main14 => {
            let wv = WeightVector::new(weights)?;
            check_main(&fs, &wv, &v, mode)?
        }
        TheoremId::Max15 => {
            let wv = WeightVector::new(weights)?;
            check_max(&fs, &wv, &v, mode)?
        }
        TheoremId::Conj16 => {
            let wv = WeightVector::new(weights)?;
            check_conjecture(&fs, &wv, &v, mode)?
        }
        TheoremId::Sawyer11 | TheoremId::Cmp12 => check_linear(
            &fs[0],
            &weights[0],
            &v,
            LinearOperator::Maximal,
            mode,
            spec.theorem,
        )?,
        TheoremId::Lop13 => check_linear(
            &fs[0],
            &weights[0],
            &v,
            LinearOperator::Riesz { pv },
            mode,
            spec.theorem,
        )?,
        TheoremId::Muczo17 | TheoremId::Cor18 => {
            let wv = WeightVector::new(weights)?;
            check_muczo(&fs, &wv, &v, &pv, mode, spec.theorem)?
        }
        TheoremId::ExtrapA => {
            let wv = WeightVector::new(weights)?;
            check_extrapolation(&fs, &wv, &v, &pv, mode)?
        }
        TheoremId::Vv42 => {
            let wv = WeightVector::new(weights)?;
            let mut families: Vec<Vec<StepFunction>> =
                fs.iter().map(|f| vec![f.clone()]).collect();
            if !spec.extra_families.is_empty() {
                if spec.extra_families.len() != m {
                    return Err(Error::Config(format!(
                        "{} extra families for {} slots",
                        spec.extra_families.len(),
                        m
                    )));
                }
                for (slot, extras) in families.iter_mut().zip(&spec.extra_families) {
                    for e in extras {
                        slot.push(e.realize(grid)?);
                    }
                }
            }
            let r = spec.r.unwrap_or(2.0);
            check_vector_valued(&families, &wv, &v, r, &pv, mode)?
        }
    };
    report.input_provenance = spec.describe();
    Ok(report)
}
