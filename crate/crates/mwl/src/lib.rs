//! A desk-scale numerical laboratory for mixed weak-type inequalities on
//! dyadic grids over the unit interval.
//!
//! The crate computes, for explicitly generated weights and step functions,
//! both sides of weighted weak-type estimates of the form
//!
//! ```text
//!   || T(f_1, ..., f_m) / v ||_{L^{1/m,∞}(nu v^{1/m})}  vs.  C * prod_i ||f_i||_{L^1(w_i)}
//! ```
//!
//! where `T` is a multilinear maximal operator, a product of maximal
//! operators, or a truncated multilinear singular integral, `nu` is the
//! geometric mean of the weight vector, and `v` is an auxiliary weight.
//! Everything is evaluated exactly at grid level: suprema range over finite
//! families of grid-aligned intervals, integrals are finite sums with a fixed
//! summation order, and every reported constant comes with the interval that
//! attains it.
//!
//! The crate is organised as a small stack:
//!
//! * [`grid`] — dyadic grids, cubes, intervals, and step functions;
//! * [`weights`] — positive weights, generators, and Muckenhoupt-type
//!   constants (`A_1`, `A_p`, Fujii–Wilson `A_∞`, `RH_∞`, multilinear `A_1`);
//! * [`norms`] — weighted `L^p`, weak `L^{p,∞}` and Lorentz `L^{p,1}`
//!   functionals with witness levels;
//! * [`operators`] — maximal operators (dyadic and all-interval modes), a
//!   truncated multilinear Riesz-kernel transform, and the iterated
//!   maximal-operator construction used for algebra weights;
//! * [`inequalities`] — ratio reports for the individual estimates, keyed by
//!   a stable theorem identifier;
//! * [`decomposition`] — level-set Calderón–Zygmund forests, principal
//!   cubes, sparseness audits, and measure-decay tables;
//! * [`search`] — a deterministic randomized search for large ratios plus
//!   refinement scans;
//! * [`instance`] / [`suite`] — serializable instance descriptions and the
//!   pinned regression suites;
//! * [`io`] / [`cli`] — CSV/JSON serialization and the command-line front
//!   end with reproducible run manifests.
//!
//! # Quick start
//!
//! ```
//! use mwl::grid::{DyadicGrid, Mode, StepFunction};
//! use mwl::operators::maximal;
//!
//! let grid = DyadicGrid::new(2).unwrap();
//! let f = StepFunction::new(grid, vec![4.0, 0.0, 0.0, 0.0]).unwrap();
//! let m = maximal(&f, Mode::Dyadic);
//! assert_eq!(m.values(), &[4.0, 2.0, 1.0, 1.0]);
//! ```
//!
//! All randomness is seeded and counter-based: rerunning any search, suite,
//! or command-line invocation with the same seed reproduces results
//! bit-for-bit, independent of the number of worker threads.

// Validation guards are written `!(x > 0.0)` rather than `x <= 0.0` so that a
// NaN input takes the error branch instead of slipping through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod decomposition;
pub mod grid;
pub mod inequalities;
pub mod instance;
pub mod io;
pub mod norms;
pub mod operators;
pub mod search;
pub mod suite;
pub mod weights;

use thiserror::Error;

/// Crate-wide error type.
///
/// The command-line front end maps variants to exit codes: configuration
/// problems exit with 2, degenerate inputs with 3, usage errors with 64.
#[derive(Debug, Error)]
pub enum Error {
    /// A mathematical precondition was violated (bad exponent, negative
    /// input, mismatched grids, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration file or flag combination is invalid.
    #[error("config error: {0}")]
    Config(String),

    /// Both sides of an inequality vanish in a way that makes the ratio
    /// meaningless, or one side vanishes while the other does not.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A computation would exceed its cost cap and no override was given.
    #[error("cost cap exceeded: {0}")]
    CostCap(String),

    /// Command-line usage error (unknown flag, malformed invocation).
    #[error("usage error: {0}")]
    Usage(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
