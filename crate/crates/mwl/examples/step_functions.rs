//! Grids, cubes, and step functions: the ground floor of the crate.
//!
//! Builds a small dyadic grid, averages a step function over cubes and
//! grid-aligned intervals, and shows how refinement preserves integrals.
//!
//! Run with `cargo run --example step_functions`.

use mwl::grid::{DyadicGrid, Interval, Mode, StepFunction};

fn main() -> mwl::Result<()> {
    // A depth-3 grid splits [0, 1) into 8 cells of width 1/8.
    let grid = DyadicGrid::new(3)?;
    println!("grid: depth {}, {} cells", grid.depth(), grid.cell_count());

    // A step function assigns one value per cell.
    let f = StepFunction::new(grid, vec![8.0, 4.0, 2.0, 1.0, 1.0, 1.0, 1.0, 1.0])?;
    println!("f      = {:?}", f.values());
    println!("∫ f    = {}", f.integral());

    // Dyadic cubes at each level; averages are exact prefix-sum quotients.
    for level in 0..=3 {
        let averages: Vec<f64> = (0..(1u64 << level))
            .map(|index| {
                let cube = grid.cube(level, index).expect("in range");
                f.average(&cube).expect("same grid")
            })
            .collect();
        println!("level {level} cube averages: {averages:?}");
    }

    // Grid-aligned intervals need not be dyadic: cells [1, 4) form a valid
    // interval but not a cube, and its average mixes three cells.
    let interval = Interval::new(1, 4, grid)?;
    println!("average over cells [1, 4) = {}", f.average(&interval)?);

    // The two supremum families behave differently: every dyadic cube is a
    // grid interval, so interval suprema dominate dyadic ones.
    println!("modes: {:?} ⊆ {:?} families", Mode::Dyadic, Mode::Intervals);

    // Refining a step function splits each cell into children carrying the
    // same value, so integrals are unchanged.
    let fine = f.refine(5)?;
    println!(
        "refined to depth {}: {} cells, ∫ f = {}",
        fine.grid().depth(),
        fine.grid().cell_count(),
        fine.integral()
    );
    assert_eq!(f.integral(), fine.integral());

    Ok(())
}
