//! Two-sided evaluation of the weighted weak-type inequalities.
//!
//! Each checker computes the left side (a weak quasi-norm of an operator
//! output divided by `v`), the right side (a product of weighted `L¹`
//! norms), their ratio, and all hypothesis constants. The all-ones instance
//! calibrates every inequality to ratio exactly 1; structured instances
//! move the ratio without breaking the one-supremum/product ordering.
//!
//! Run with `cargo run --example inequality_ratios`.

use mwl::grid::Mode;
use mwl::inequalities::TheoremId;
use mwl::instance::{run_instance, FunctionSpec, InstanceSpec, WeightSpec};

fn main() -> mwl::Result<()> {
    // All-ones: every inequality reports ratio exactly 1, because both
    // sides reduce to the measure of the whole interval.
    let ones = InstanceSpec::new(
        TheoremId::Main14,
        vec![FunctionSpec::cube(0, 0), FunctionSpec::cube(0, 0)],
        vec![WeightSpec::Const { value: 1.0 }, WeightSpec::Const { value: 1.0 }],
        WeightSpec::Const { value: 1.0 },
    );
    let report = run_instance(&ones, 6, Mode::Dyadic, false)?;
    println!(
        "all-ones {}: lhs {} rhs {} ratio {}",
        report.theorem, report.lhs, report.rhs, report.ratio
    );
    assert_eq!(report.ratio, 1.0);

    // A structured pair: singular power weight against a cascade, with
    // off-center indicator data.
    let spec = InstanceSpec::new(
        TheoremId::Main14,
        vec![
            FunctionSpec { terms: vec![(1.0, mwl::instance::IndicatorSpec::Cube { level: 2, index: 0 }), (0.5, mwl::instance::IndicatorSpec::Cube { level: 1, index: 1 })] },
            FunctionSpec::cube(2, 1),
        ],
        vec![
            WeightSpec::Power { exponent: -0.6, center: 0.0 },
            WeightSpec::Martingale { seed: 21, beta: 0.3, levels: 5 },
        ],
        WeightSpec::Power { exponent: -0.3, center: 1.0 },
    );

    println!("\nproduct form vs one-supremum form, depth 8:");
    for theorem in [TheoremId::Main14, TheoremId::Max15] {
        let mut s = spec.clone();
        s.theorem = theorem;
        let r = run_instance(&s, 8, Mode::Dyadic, false)?;
        println!(
            "  {:8} lhs {:.6}  rhs {:.6}  ratio {:.6}",
            r.theorem.as_str(),
            r.lhs,
            r.rhs,
            r.ratio
        );
    }

    // The one-supremum left side never exceeds the product left side: the
    // pointwise domination survives the weak norm exactly, not just up to
    // rounding.
    let mut main = spec.clone();
    main.theorem = TheoremId::Main14;
    let mut max = spec.clone();
    max.theorem = TheoremId::Max15;
    let (rm, rx) = (
        run_instance(&main, 8, Mode::Dyadic, false)?,
        run_instance(&max, 8, Mode::Dyadic, false)?,
    );
    assert!(rx.lhs <= rm.lhs);
    println!("one-supremum lhs ≤ product lhs: {:.6} ≤ {:.6}", rx.lhs, rm.lhs);

    // Reports carry the hypothesis constants used by the estimates.
    println!("\nhypothesis constants of the product-form report:");
    for (name, c) in &rm.hypothesis_constants {
        println!(
            "  {name:8} A1 = {:8.4}  A∞ = {:8.4}  RH∞ = {:8.4}",
            c.a1.value, c.ainf.value, c.rhinf.value
        );
    }
    if let Some(ml) = &rm.multilinear_a1 {
        println!("  vector A1 = {:.4}", ml.value);
    }

    Ok(())
}
