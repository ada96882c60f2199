//! Dyadic grids on `[0, 1)` and the step functions that live on them.
//!
//! A grid of depth `d` splits the unit interval into `2^d` half-open cells of
//! width `2^-d`. Cell widths are exact binary floats, so averages over
//! grid-aligned regions reduce to sums of cell values divided by a cell
//! count, with no quadrature error. All sums run left to right in cell order
//! so results are bit-reproducible.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::Range;

use crate::{Error, Result};

/// Hard ceiling on grid depth; `2^26` cells is far beyond desk scale.
pub const MAX_DEPTH: u32 = 26;

/// A dyadic grid on the unit interval, identified by its depth.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DyadicGrid {
    depth: u32,
}

impl DyadicGrid {
    pub fn new(depth: u32) -> Result<Self> {
        if depth > MAX_DEPTH {
            return Err(Error::Domain(format!(
                "grid depth {depth} exceeds maximum {MAX_DEPTH}"
            )));
        }
        Ok(DyadicGrid { depth })
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn cell_count(&self) -> usize {
        1usize << self.depth
    }

    /// Cell width `2^-depth`, exact in binary floating point.
    pub fn cell_width(&self) -> f64 {
        1.0 / (1u64 << self.depth) as f64
    }

    /// Left endpoint of cell `i`.
    pub fn cell_left(&self, i: usize) -> f64 {
        i as f64 * self.cell_width()
    }

    /// Midpoint of cell `i`, the quadrature node for kernel evaluation.
    pub fn cell_midpoint(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.cell_width()
    }

    pub fn cube(&self, level: u32, index: u64) -> Result<DyadicCube> {
        if level > self.depth {
            return Err(Error::Domain(format!(
                "cube level {level} exceeds grid depth {}",
                self.depth
            )));
        }
        if index >= (1u64 << level) {
            return Err(Error::Domain(format!(
                "cube index {index} out of range at level {level}"
            )));
        }
        Ok(DyadicCube { level, index })
    }

    /// All dyadic cubes of the grid, coarse levels first.
    pub fn all_cubes(&self) -> impl Iterator<Item = DyadicCube> {
        let depth = self.depth;
        (0..=depth).flat_map(|level| (0..(1u64 << level)).map(move |index| DyadicCube { level, index }))
    }
}

/// A dyadic cube `[index * 2^-level, (index + 1) * 2^-level)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicCube {
    pub level: u32,
    pub index: u64,
}

impl DyadicCube {
    pub const ROOT: DyadicCube = DyadicCube { level: 0, index: 0 };

    /// The parent cube, or `None` for the root.
    pub fn parent(&self) -> Option<DyadicCube> {
        if self.level == 0 {
            None
        } else {
            Some(DyadicCube {
                level: self.level - 1,
                index: self.index >> 1,
            })
        }
    }

    /// Whether `self` contains `other` (non-strictly).
    pub fn contains(&self, other: &DyadicCube) -> bool {
        other.level >= self.level && (other.index >> (other.level - self.level)) == self.index
    }

    pub fn width(&self) -> f64 {
        1.0 / (1u64 << self.level) as f64
    }

    /// The range of grid cells covered by this cube.
    pub fn cells(&self, grid: DyadicGrid) -> Result<Range<usize>> {
        if self.level > grid.depth() {
            return Err(Error::Domain(format!(
                "cube level {} exceeds grid depth {}",
                self.level,
                grid.depth()
            )));
        }
        let span = 1usize << (grid.depth() - self.level);
        let start = self.index as usize * span;
        Ok(start..start + span)
    }
}

impl fmt::Display for DyadicCube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "I({},{})", self.level, self.index)
    }
}

/// A grid-aligned interval `[start_cell * h, end_cell * h)`, `h` the cell width.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    start_cell: usize,
    end_cell: usize,
}

impl Interval {
    pub fn new(start_cell: usize, end_cell: usize, grid: DyadicGrid) -> Result<Self> {
        if start_cell >= end_cell || end_cell > grid.cell_count() {
            return Err(Error::Domain(format!(
                "invalid interval [{start_cell}, {end_cell}) on a grid with {} cells",
                grid.cell_count()
            )));
        }
        Ok(Interval { start_cell, end_cell })
    }

    pub fn start_cell(&self) -> usize {
        self.start_cell
    }

    pub fn end_cell(&self) -> usize {
        self.end_cell
    }

    pub fn cells(&self) -> Range<usize> {
        self.start_cell..self.end_cell
    }
}

/// Which family of intervals a supremum ranges over.
///
/// `Dyadic` scans only dyadic cubes (`O(N log N)` work); `Intervals` scans
/// every grid-aligned interval and always dominates the dyadic value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Dyadic,
    Intervals,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Dyadic => write!(f, "dyadic"),
            Mode::Intervals => write!(f, "intervals"),
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dyadic" => Ok(Mode::Dyadic),
            "intervals" => Ok(Mode::Intervals),
            other => Err(Error::Config(format!(
                "unknown mode {other:?}; expected \"dyadic\" or \"intervals\""
            ))),
        }
    }
}

/// A region of the grid over which averages are taken.
pub trait GridRegion {
    fn cell_range(&self, grid: DyadicGrid) -> Result<Range<usize>>;
}

impl GridRegion for DyadicCube {
    fn cell_range(&self, grid: DyadicGrid) -> Result<Range<usize>> {
        self.cells(grid)
    }
}

impl GridRegion for Interval {
    fn cell_range(&self, grid: DyadicGrid) -> Result<Range<usize>> {
        if self.end_cell > grid.cell_count() {
            return Err(Error::Domain(format!(
                "interval [{}, {}) out of range on a grid with {} cells",
                self.start_cell,
                self.end_cell,
                grid.cell_count()
            )));
        }
        Ok(self.cells())
    }
}

/// A real-valued function constant on each grid cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    grid: DyadicGrid,
    values: Vec<f64>,
}

impl StepFunction {
    /// Wraps a value vector; every value must be finite.
    pub fn new(grid: DyadicGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.cell_count() {
            return Err(Error::Domain(format!(
                "value count {} does not match cell count {}",
                values.len(),
                grid.cell_count()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite cell value {bad}")));
        }
        Ok(StepFunction { grid, values })
    }

    pub fn constant(grid: DyadicGrid, c: f64) -> Result<Self> {
        StepFunction::new(grid, vec![c; grid.cell_count()])
    }

    /// Samples `f` at cell midpoints.
    pub fn from_fn(grid: DyadicGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = (0..grid.cell_count()).map(|i| f(grid.cell_midpoint(i))).collect();
        StepFunction::new(grid, values)
    }

    /// The indicator of a dyadic cube.
    pub fn indicator(grid: DyadicGrid, cube: DyadicCube) -> Result<Self> {
        let cells = cube.cells(grid)?;
        StepFunction::indicator_cells(grid, cells)
    }

    /// The indicator of an arbitrary run of cells `[start, end)`.
    pub fn indicator_cells(grid: DyadicGrid, cells: Range<usize>) -> Result<Self> {
        if cells.start >= cells.end || cells.end > grid.cell_count() {
            return Err(Error::Domain(format!(
                "cell range {}..{} is empty or out of bounds for {} cells",
                cells.start,
                cells.end,
                grid.cell_count()
            )));
        }
        let mut values = vec![0.0; grid.cell_count()];
        for i in cells {
            values[i] = 1.0;
        }
        StepFunction::new(grid, values)
    }

    pub fn grid(&self) -> DyadicGrid {
        self.grid
    }

    pub fn depth(&self) -> u32 {
        self.grid.depth()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, cell: usize) -> f64 {
        self.values[cell]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Pointwise map; the result must stay finite.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<StepFunction> {
        StepFunction::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Pointwise combination of two functions on the same grid.
    pub fn zip(&self, other: &StepFunction, f: impl Fn(f64, f64) -> f64) -> Result<StepFunction> {
        same_grid(self, other)?;
        let values = self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(&a, &b)| f(a, b))
            .collect();
        StepFunction::new(self.grid, values)
    }

    pub fn abs(&self) -> StepFunction {
        // Absolute values of finite numbers are finite; unwrap is safe.
        self.map(f64::abs).unwrap()
    }

    /// Average over a grid region: the sum of cell values divided by the
    /// cell count. Exact up to a single rounded division.
    pub fn average(&self, region: &impl GridRegion) -> Result<f64> {
        let range = region.cell_range(self.grid)?;
        let len = range.len();
        let mut sum = 0.0;
        for i in range {
            sum += self.values[i];
        }
        Ok(sum / len as f64)
    }

    /// Lebesgue integral over the whole grid.
    pub fn integral(&self) -> f64 {
        let mut sum = 0.0;
        for &v in &self.values {
            sum += v;
        }
        sum * self.grid.cell_width()
    }

    /// Re-samples onto a finer grid by repeating cell values.
    ///
    /// Averages over any region of the original grid are preserved exactly:
    /// each coarse cell is replaced by `2^(d'-d)` equal copies.
    pub fn refine(&self, depth: u32) -> Result<StepFunction> {
        if depth < self.grid.depth() {
            return Err(Error::Domain(format!(
                "cannot refine from depth {} to coarser depth {depth}",
                self.grid.depth()
            )));
        }
        let grid = DyadicGrid::new(depth)?;
        let rep = 1usize << (depth - self.grid.depth());
        let mut values = Vec::with_capacity(grid.cell_count());
        for &v in &self.values {
            values.extend(std::iter::repeat_n(v, rep));
        }
        StepFunction::new(grid, values)
    }
}

/// Checks that two step functions share a grid.
pub fn same_grid(a: &StepFunction, b: &StepFunction) -> Result<()> {
    if a.grid() != b.grid() {
        return Err(Error::Domain(format!(
            "grid mismatch: depth {} vs depth {}",
            a.depth(),
            b.depth()
        )));
    }
    Ok(())
}

/// Sum of `w(cell) * cell_width` over an explicit cell set.
///
/// Cells are visited in the order given; callers pass sorted sets for
/// reproducibility.
pub fn weighted_measure(w: &StepFunction, cells: impl IntoIterator<Item = usize>) -> f64 {
    let mut sum = 0.0;
    for i in cells {
        sum += w.value(i);
    }
    sum * w.grid().cell_width()
}

/// Left-to-right prefix sums for O(1) interval sums and averages.
#[derive(Clone, Debug)]
pub(crate) struct Prefix {
    sums: Vec<f64>,
}

impl Prefix {
    pub(crate) fn new(values: &[f64]) -> Prefix {
        let mut sums = Vec::with_capacity(values.len() + 1);
        let mut acc = 0.0;
        sums.push(0.0);
        for &v in values {
            acc += v;
            sums.push(acc);
        }
        Prefix { sums }
    }

    /// Sum of values over cells `[a, b)`.
    #[inline]
    pub(crate) fn sum(&self, a: usize, b: usize) -> f64 {
        self.sums[b] - self.sums[a]
    }

    /// Average over cells `[a, b)`.
    #[inline]
    pub(crate) fn avg(&self, a: usize, b: usize) -> f64 {
        self.sum(a, b) / (b - a) as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(depth: u32) -> DyadicGrid {
        DyadicGrid::new(depth).unwrap()
    }

    #[test]
    fn averages_at_depth_two() {
        // f = (4, 0, 0, 0): average 1 over the whole interval, 2 over the
        // left half, 4 over the first cell.
        let g = grid(2);
        let f = StepFunction::new(g, vec![4.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(f.average(&DyadicCube::ROOT).unwrap(), 1.0);
        assert_eq!(f.average(&g.cube(1, 0).unwrap()).unwrap(), 2.0);
        assert_eq!(f.average(&g.cube(2, 0).unwrap()).unwrap(), 4.0);
        let left_three = Interval::new(0, 3, g).unwrap();
        assert_eq!(f.average(&left_three).unwrap(), 4.0 / 3.0);
    }

    #[test]
    fn single_cell_average_is_the_value() {
        let g = grid(3);
        let f = StepFunction::from_fn(g, |x| 1.0 + x * x).unwrap();
        for i in 0..g.cell_count() {
            let cell = Interval::new(i, i + 1, g).unwrap();
            assert_eq!(f.average(&cell).unwrap(), f.value(i));
        }
    }

    #[test]
    fn nested_cube_average_is_mean_of_children() {
        let g = grid(5);
        let f = StepFunction::from_fn(g, |x| (7.3 * x).sin().abs() + 0.25).unwrap();
        for cube in g.all_cubes() {
            if cube.level == g.depth() {
                continue;
            }
            let l = g.cube(cube.level + 1, 2 * cube.index).unwrap();
            let r = g.cube(cube.level + 1, 2 * cube.index + 1).unwrap();
            let mean =
                (f.average(&l).unwrap() + f.average(&r).unwrap()) / 2.0;
            let got = f.average(&cube).unwrap();
            assert!((got - mean).abs() <= 1e-12 * mean.abs().max(1.0));
        }
    }

    #[test]
    fn weighted_measure_is_additive_on_disjoint_cell_sets() {
        let g = grid(4);
        let w = StepFunction::from_fn(g, |x| 1.0 + x).unwrap();
        let evens: Vec<usize> = (0..16).step_by(2).collect();
        let odds: Vec<usize> = (1..16).step_by(2).collect();
        let total = weighted_measure(&w, 0..16);
        let split = weighted_measure(&w, evens) + weighted_measure(&w, odds);
        assert!((total - split).abs() <= 1e-12 * total);
        assert!((total - w.integral()).abs() <= 1e-12 * total);
    }

    #[test]
    fn refine_repeats_cells() {
        let g = grid(1);
        let f = StepFunction::new(g, vec![2.0, 6.0]).unwrap();
        let r = f.refine(3).unwrap();
        assert_eq!(r.values(), &[2.0, 2.0, 2.0, 2.0, 6.0, 6.0, 6.0, 6.0]);
        assert!(f.refine(0).is_err());
    }

    #[test]
    fn cube_cell_ranges() {
        let g = grid(3);
        let c = g.cube(1, 1).unwrap();
        assert_eq!(c.cells(g).unwrap(), 4..8);
        assert!(c.contains(&g.cube(3, 7).unwrap()));
        assert!(!c.contains(&g.cube(3, 3).unwrap()));
        assert_eq!(g.cube(3, 5).unwrap().parent(), Some(g.cube(2, 2).unwrap()));
        assert_eq!(DyadicCube::ROOT.parent(), None);
    }

    #[test]
    fn invalid_constructions_are_rejected() {
        let g = grid(2);
        assert!(StepFunction::new(g, vec![1.0, 2.0]).is_err());
        assert!(StepFunction::new(g, vec![1.0, f64::NAN, 0.0, 0.0]).is_err());
        assert!(Interval::new(2, 2, g).is_err());
        assert!(Interval::new(0, 5, g).is_err());
        assert!(g.cube(3, 0).is_err());
        assert!(DyadicGrid::new(MAX_DEPTH + 1).is_err());
    }

    proptest! {
        #[test]
        fn refine_preserves_region_averages(
            depth in 1u32..6,
            extra in 1u32..3,
            seed in 0u64..1000,
        ) {
            let g = grid(depth);
            let vals: Vec<f64> = (0..g.cell_count())
                .map(|i| {
                    let x = (i as u64).wrapping_mul(6364136223846793005).wrapping_add(seed);
                    (x >> 11) as f64 / (1u64 << 53) as f64 * 10.0
                })
                .collect();
            let f = StepFunction::new(g, vals).unwrap();
            let fine = f.refine(depth + extra).unwrap();
            for cube in g.all_cubes() {
                let coarse_avg = f.average(&cube).unwrap();
                // Same cube viewed on the finer grid.
                let fine_avg = fine.average(&cube).unwrap();
                prop_assert!((coarse_avg - fine_avg).abs() <= 1e-12 * coarse_avg.abs().max(1.0));
            }
            prop_assert!((f.integral() - fine.integral()).abs() <= 1e-12);
        }

        #[test]
        fn average_between_min_and_max(depth in 1u32..7, lo in 0usize..10, hi in 11usize..40) {
            let g = grid(depth);
            let n = g.cell_count();
            let f = StepFunction::from_fn(g, |x| (x * lo as f64).cos() + hi as f64 / 10.0).unwrap();
            let a = lo % n;
            let b = a + 1 + (hi % (n - a).max(1)).min(n - a - 1);
            let iv = Interval::new(a, b, g).unwrap();
            let avg = f.average(&iv).unwrap();
            let mn = f.values()[a..b].iter().cloned().fold(f64::INFINITY, f64::min);
            let mx = f.values()[a..b].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(avg >= mn - 1e-12 && avg <= mx + 1e-12);
        }
    }
}
