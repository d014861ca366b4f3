//! Conformable fractional calculus on uniform grids, and a fixed-point solver
//! for the nonlocal conformable thermistor problem
//!
//! ```text
//! u^(α)(t) = λ f(t, u(t)) / (∫_a^T f(x, u(x)) dx)²,   t ∈ [a, T],   u(a) = u_a
//! ```
//!
//! The crate is organised bottom-up:
//!
//! - [`grid`]: uniform grids on `[a, T]` with `a > 0` and sampled functions on them.
//! - [`conformable`]: the conformable derivative `T_α u = t^{1-α} u'` and integral
//!   `I_α^a u = ∫_a^t u(τ) τ^{α-1} dτ`, plus the exponential weight used by the
//!   damped linear problem.
//! - [`linear`]: the explicit solution of `x^(α) + x / a^α = g`, `x(a) = x0`.
//! - [`model`]: the thermistor problem, its nonlocal right-hand side `g(t, u)`
//!   and the `A`, `B`, `G` bound diagnostics.
//! - [`tube`]: tube solutions `(v, M)`, the radial truncation onto a tube and the
//!   tube verification report.
//! - [`fixed_point`]: the operator `K`, damped Picard iteration and an
//!   independent RK4 oracle.
//! - [`expr`]: a small expression language for user supplied sources `f(t, u)`.

// `!(x > 0.0)` is used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conformable;
pub mod error;
pub mod expr;
pub mod fixed_point;
pub mod grid;
pub mod linear;
pub mod model;
pub mod tube;

pub use conformable::Alpha;
pub use error::{Error, Result};
pub use expr::Expr;
pub use fixed_point::{
    apply_k, ode_residual, oracle_solve, picard_solve, OracleSolution, SolveOptions, SolveReport,
};
pub use grid::{Grid, GridFunction};
pub use linear::{linear_residual, solve_linear};
pub use model::{Bounds, Source, ThermistorProblem};
pub use tube::{closed_form_center, Tube, TubeReport};
