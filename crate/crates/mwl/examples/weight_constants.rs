//! Weight generators and Muckenhoupt-type constants.
//!
//! Generates power-law and seeded-cascade weights, then computes their
//! `A_1`, Fujii–Wilson `A_∞`, `RH_∞`, and `A_p` constants in both supremum
//! modes. Every constant comes with the interval that attains it.
//!
//! Run with `cargo run --example weight_constants`.

use mwl::grid::{DyadicGrid, Mode};
use mwl::weights::{
    a1_constant, ainf_constant, ap_constant, gen_martingale, gen_power, multilinear_a1_constant,
    rhinf_constant, Weight, WeightVector,
};

fn main() -> mwl::Result<()> {
    let grid = DyadicGrid::new(8)?;

    // |x|^(-1/2), cell-averaged exactly; a classical A_1 weight.
    let w1 = gen_power(grid, -0.5, 0.0, None)?;
    // A seeded multiplicative cascade: rerunning reproduces it bit for bit.
    let w2 = gen_martingale(grid, 7, 0.35, 6)?;

    for (name, w) in [("power |x|^-1/2", &w1), ("cascade β=0.35", &w2)] {
        println!("{name}:");
        for mode in [Mode::Dyadic, Mode::Intervals] {
            let a1 = a1_constant(w, mode);
            let ainf = ainf_constant(w, mode);
            let rh = rhinf_constant(w, mode);
            let a2 = ap_constant(w, 2.0, mode)?;
            println!(
                "  {mode:9}: A1 = {:8.4}  A∞ = {:8.4}  RH∞ = {:8.4}  A2 = {:8.4}",
                a1.value, ainf.value, rh.value, a2.value
            );
            println!("             A1 attained on {}", a1.witness);
        }
    }

    // The constant weight has every constant equal to 1 — a useful sanity
    // anchor for all four scans.
    let flat = Weight::one(grid);
    assert_eq!(a1_constant(&flat, Mode::Intervals).value, 1.0);
    assert_eq!(ainf_constant(&flat, Mode::Intervals).value, 1.0);
    println!("\nconstant weight: all constants exactly 1");

    // A weight vector also has a geometric mean ν = (∏ w_i)^(1/m) and a
    // multilinear (vector) A_1 constant, which can be finite even when some
    // slot is not itself A_1.
    let wv = WeightVector::new(vec![w1, w2])?;
    let ml = multilinear_a1_constant(&wv, Mode::Dyadic);
    println!(
        "vector of both: multilinear A1 = {:.4} (m-th root {:.4}), ν A1 = {:.4}",
        ml.value,
        ml.mth_root,
        a1_constant(wv.nu(), Mode::Dyadic).value
    );

    Ok(())
}
