//! Weighted Lebesgue, weak-type, and Lorentz functionals for step functions.
//!
//! All quantities are driven by the exact distribution function of `|f|`
//! with respect to a positive density: on a step function the map
//! `t -> mu{|f| > t}` is piecewise constant, so suprema and layer-cake
//! integrals reduce to finite scans over the distinct values of `|f|`.

use serde::{Deserialize, Serialize};

use crate::grid::StepFunction;
use crate::weights::Weight;
use crate::{Error, Result};

/// Exact distribution data of `|f|` under the measure `w(x) dx`.
///
/// `levels` holds the distinct positive values of `|f|` in descending order
/// and `measures[j] = mu{ |f| >= levels[j] }`; the cumulative measures are
/// strictly increasing because the density is bounded below by its floor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionTable {
    levels: Vec<f64>,
    measures: Vec<f64>,
}

/// A weak-type functional value together with the level attaining it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakValue {
    pub value: f64,
    pub witness_t: f64,
}

impl DistributionTable {
    /// Builds the table for `|f|` under `density(x) dx`.
    pub fn new(f: &StepFunction, density: &Weight) -> Result<DistributionTable> {
        if f.grid() != density.grid() {
            return Err(Error::Domain(
                "distribution table needs function and density on one grid".into(),
            ));
        }
        let h = f.grid().cell_width();
        let mut cells: Vec<usize> = (0..f.grid().cell_count()).collect();
        cells.sort_unstable_by(|&a, &b| {
            f.value(b)
                .abs()
                .partial_cmp(&f.value(a).abs())
                .expect("step values are finite")
                .then(a.cmp(&b))
        });
        let mut levels = Vec::new();
        let mut measures = Vec::new();
        let mut acc = 0.0;
        for &i in &cells {
            let v = f.value(i).abs();
            if v == 0.0 {
                break;
            }
            if levels.last() != Some(&v) {
                levels.push(v);
                measures.push(0.0);
            }
            acc += density.value(i) * h;
            *measures.last_mut().unwrap() = acc;
        }
        Ok(DistributionTable { levels, measures })
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// `mu{ |f| >= levels[j] }` for each stored level.
    pub fn measures(&self) -> &[f64] {
        &self.measures
    }

    /// `mu{ |f| > t }` for arbitrary `t >= 0`.
    pub fn measure_above(&self, t: f64) -> f64 {
        // Levels are descending; find the smallest stored level > t.
        let mut out = 0.0;
        for (lv, ms) in self.levels.iter().zip(&self.measures) {
            if *lv > t {
                out = *ms;
            } else {
                break;
            }
        }
        out
    }

    /// `sup_t t * mu{|f| > t}^{1/p}`, attained at one of the stored levels.
    ///
    /// On each constancy interval of the distribution function the integrand
    /// increases in `t`, so the supremum is `max_j levels[j] *
    /// measures[j]^{1/p}`; ties keep the largest level.
    pub fn weak_quasinorm(&self, p: f64) -> Result<WeakValue> {
        check_p(p)?;
        let mut best = WeakValue { value: 0.0, witness_t: 0.0 };
        for (lv, ms) in self.levels.iter().zip(&self.measures) {
            let v = lv * ms.powf(1.0 / p);
            if v > best.value {
                best = WeakValue { value: v, witness_t: *lv };
            }
        }
        Ok(best)
    }

    /// The Lorentz norm `||f||_{L^{p,1}} = ∫_0^∞ mu{|f| > t}^{1/p} dt`,
    /// evaluated exactly as a layer-cake sum over the constancy intervals.
    pub fn lorentz_p1(&self, p: f64) -> Result<f64> {
        check_p(p)?;
        let mut total = 0.0;
        for j in 0..self.levels.len() {
            let below = if j + 1 < self.levels.len() { self.levels[j + 1] } else { 0.0 };
            total += (self.levels[j] - below) * self.measures[j].powf(1.0 / p);
        }
        Ok(total)
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::Domain(format!("exponent must satisfy 0 < p < ∞, got {p}")));
    }
    Ok(())
}

/// `(∫ |f|^p w dx)^{1/p}` for `0 < p < ∞`; `p = 1` avoids the power calls.
pub fn lp_norm(f: &StepFunction, density: &Weight, p: f64) -> Result<f64> {
    check_p(p)?;
    if f.grid() != density.grid() {
        return Err(Error::Domain("norm needs function and density on one grid".into()));
    }
    let h = f.grid().cell_width();
    if p == 1.0 {
        let mut sum = 0.0;
        for (v, w) in f.values().iter().zip(density.values()) {
            sum += v.abs() * w;
        }
        return Ok(sum * h);
    }
    let mut sum = 0.0;
    for (v, w) in f.values().iter().zip(density.values()) {
        sum += v.abs().powf(p) * w;
    }
    Ok((sum * h).powf(1.0 / p))
}

/// Convenience wrapper: weak `L^{p,∞}` quasinorm of `f` under `w dx`.
pub fn weak_quasinorm(f: &StepFunction, density: &Weight, p: f64) -> Result<WeakValue> {
    DistributionTable::new(f, density)?.weak_quasinorm(p)
}

/// Convenience wrapper: Lorentz `L^{p,1}` norm of `f` under `w dx`.
pub fn lorentz_p1_norm(f: &StepFunction, density: &Weight, p: f64) -> Result<f64> {
    DistributionTable::new(f, density)?.lorentz_p1(p)
}
