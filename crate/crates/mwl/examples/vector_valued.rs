//! Vector-valued aggregates of the singular-integral estimate.
//!
//! For families `f^i = (f^i_k)_k` in each slot, the left side aggregates
//! `|T(f¹_{k₁}, …, f^m_{k_m})|/v` in `ℓ^r` over all index tuples and takes
//! the weak norm; the right side multiplies the `L¹(w_i)` norms of the
//! slot-wise `ℓ^r` aggregates. Singleton families collapse to the scalar
//! estimate bit for bit, which anchors the implementation.
//!
//! Run with `cargo run --example vector_valued`.

use mwl::grid::{DyadicGrid, Mode, StepFunction};
use mwl::inequalities::{check_muczo, check_vector_valued, TheoremId};
use mwl::operators::PVConfig;
use mwl::weights::{gen_martingale, gen_power, Weight, WeightVector};

fn main() -> mwl::Result<()> {
    let depth = 6;
    let grid = DyadicGrid::new(depth)?;

    let w1 = gen_power(grid, -0.3, 0.0, None)?;
    let w2 = gen_martingale(grid, 31, 0.2, 3)?;
    let wv = WeightVector::new(vec![w1, w2])?;
    let v = Weight::one(grid);
    let cfg = PVConfig {
        component_j: 1,
        exclusion_radius: grid.cell_width(),
        override_cost_cap: false,
    };

    let bump = |a: f64, b: f64| StepFunction::from_fn(grid, move |x| f64::from((a..b).contains(&x)));

    // Singleton families reproduce the scalar singular-integral report
    // exactly — same left side, same right side, same witness.
    let f1 = bump(0.0, 0.25)?;
    let f2 = bump(0.5, 0.75)?;
    let scalar = check_muczo(
        &[f1.clone(), f2.clone()],
        &wv,
        &v,
        &cfg,
        Mode::Dyadic,
        TheoremId::Muczo17,
    )?;
    let singleton = check_vector_valued(
        &[vec![f1.clone()], vec![f2.clone()]],
        &wv,
        &v,
        2.0,
        &cfg,
        Mode::Dyadic,
    )?;
    println!("scalar    lhs {:.6} rhs {:.6} ratio {:.6}", scalar.lhs, scalar.rhs, scalar.ratio);
    println!("singleton lhs {:.6} rhs {:.6} ratio {:.6}", singleton.lhs, singleton.rhs, singleton.ratio);
    assert_eq!(scalar.lhs.to_bits(), singleton.lhs.to_bits());
    assert_eq!(scalar.rhs.to_bits(), singleton.rhs.to_bits());
    println!("singleton families reproduce the scalar report bit for bit\n");

    // Genuine families: two functions in the first slot, two in the second,
    // so the aggregate runs over four kernel evaluations.
    let families = [
        vec![f1, bump(0.25, 0.375)?],
        vec![f2, bump(0.75, 1.0)?],
    ];
    for r in [1.5, 2.0] {
        let report = check_vector_valued(&families, &wv, &v, r, &cfg, Mode::Dyadic)?;
        println!(
            "ℓ^{r} aggregate over {} tuples: lhs {:.6} rhs {:.6} ratio {:.6}",
            families[0].len() * families[1].len(),
            report.lhs,
            report.rhs,
            report.ratio
        );
    }

    // The exponent range (1, 2] is a hard precondition.
    assert!(check_vector_valued(&families, &wv, &v, 2.5, &cfg, Mode::Dyadic).is_err());
    println!("\naggregate exponents outside (1, 2] are rejected");

    Ok(())
}
