//! Numerical toolkit for average-distance functionals of signed measures.
//!
//! A signed measure `φ = φ⁺ − φ⁻` with compact support induces, for a finite
//! point set `Σ`, the objective
//!
//! ```text
//! F(Σ) = ∫ dist(x, Σ) dφ⁺(x) − ∫ dist(x, Σ) dφ⁻(x)
//! ```
//!
//! and for a closed set `M` the analogous `F(M)` with `dist(·, Σ)` replaced by
//! `dist(·, M)`.  This crate provides:
//!
//! * [`measure`] — atoms, gridded densities, quadrature, grid discretization,
//!   and exact 1-Wasserstein distances between atomic measures;
//! * [`geometry`] — point configurations, complements of finite ball unions,
//!   distance/projection queries, boundary and shell nets with cardinality
//!   bounds, and a uniform external-ball test;
//! * [`objective`] — evaluation of `F` for configurations and regions,
//!   essential parts, and the rescaled optimality gap;
//! * [`solve_k`] — exhaustive and multistart descent solvers for the
//!   best-`k`-points problem, with a norm bound certificate and a probe for
//!   instances whose infimum is not attained;
//! * [`region`] — canonical ball-complement regions built from a
//!   configuration, radius optimization, and first-order optimality
//!   certificates (first variation, balanced projection, interior mass);
//! * [`asymptotics`] — quantization coefficient estimation, limit densities,
//!   the limiting energy functional, and convergence reports over a schedule
//!   of `k` values;
//! * [`validate`] — the randomized invariant suite and the acceptance battery
//!   used by the `siglo validate` command;
//! * [`instances`] — the standard benchmark instances shared by tests, the
//!   validation battery, and the CLI's built-in examples.
//!
//! All randomized routines take explicit seeds and produce bit-identical
//! results for identical inputs, independent of thread count.

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod asymptotics;
pub mod geometry;
pub mod instances;
pub mod measure;
pub mod objective;
pub mod region;
pub mod solve_k;
pub mod validate;

mod util;

pub use geometry::{BallComplementRegion, Net, NetKind, PointConfig};
pub use measure::{Atom, GriddedDensity, MeasureComponent, SignedMeasure};
pub use objective::ObjectiveValue;
pub use solve_k::{SolveReport, SolverConfig};
