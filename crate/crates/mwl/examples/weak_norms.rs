//! Weighted norms: `L^p`, weak `L^{p,∞}`, and Lorentz `L^{p,1}`.
//!
//! On a finite grid the weak quasi-norm's supremum over thresholds is
//! attained at one of the function's own values, so the crate computes it
//! exactly from the sorted distribution table — no threshold sweep, no
//! tolerance. This example cross-checks that exactness against a dense
//! sweep and shows the norm inequalities the estimates depend on.
//!
//! Run with `cargo run --example weak_norms`.

use mwl::grid::{DyadicGrid, StepFunction};
use mwl::norms::{lorentz_p1_norm, lp_norm, weak_quasinorm};
use mwl::weights::{gen_power, Weight};

fn main() -> mwl::Result<()> {
    let grid = DyadicGrid::new(7)?;
    let f = StepFunction::from_fn(grid, |x| (1.0 - x).powi(2) * if x < 0.5 { 3.0 } else { 1.0 })?;
    let w = gen_power(grid, -0.25, 0.5, None)?;
    let p = 0.5; // the weak space the endpoint estimates live in

    // The exact weak value: sup_t t · w({|f| > t})^(1/p), attained at a
    // function value.
    let weak = weak_quasinorm(&f, &w, p)?;
    println!("weak L^({p},∞): value {:.10}, attained at t = {:.10}", weak.value, weak.witness_t);

    // Dense sweep: 10⁴ log-spaced thresholds plus every exact function
    // value (nudged down so the strict level set still contains its cell).
    // Never exceeds the exact answer, and the union recovers it.
    let lo = f.values().iter().cloned().filter(|v| *v > 0.0).fold(f64::INFINITY, f64::min);
    let hi = f.max_abs();
    let mut thresholds: Vec<f64> =
        (0..=10_000).map(|i| lo * (hi / lo).powf(i as f64 / 10_000.0)).collect();
    thresholds.extend(f.values().iter().map(|v| v.abs()));
    let mut best = 0.0f64;
    for t0 in thresholds {
        let t = t0 * (1.0 - 1e-12);
        let mass: f64 = f
            .values()
            .iter()
            .zip(w.values())
            .filter(|(v, _)| v.abs() > t)
            .map(|(_, wv)| wv)
            .sum::<f64>()
            * grid.cell_width();
        best = best.max(t * mass.powf(1.0 / p));
    }
    println!("dense sweep (log grid ∪ exact levels): {best:.10}");
    assert!(best <= weak.value * (1.0 + 1e-12));
    assert!(best >= weak.value * (1.0 - 1e-9));

    // Norm comparisons on a probability-normalized weight: weak ≤ strong,
    // and the Lorentz L^(p,1) norm dominates L^p for p ≥ 1.
    let mass = w.step().integral();
    let wn = Weight::from_positive(w.step().map(|v| v / mass)?)?;
    for q in [1.0, 1.5, 3.0] {
        let strong = lp_norm(&f, &wn, q)?;
        let weak_q = weak_quasinorm(&f, &wn, q)?.value;
        let lorentz = lorentz_p1_norm(&f, &wn, q)?;
        println!(
            "p = {q}: weak {weak_q:.6} ≤ strong {strong:.6} ≤ Lorentz(p,1) {lorentz:.6}"
        );
        assert!(weak_q <= strong * (1.0 + 1e-12));
        assert!(strong <= lorentz * (1.0 + 1e-12));
    }

    Ok(())
}
