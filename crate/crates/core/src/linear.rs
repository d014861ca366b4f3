//! Explicit solution of the damped linear conformable problem
//!
//! ```text
//! x^(α)(t) + x(t) / a^α = g(t),   t ∈ [a, T],   x(a) = x0,
//! ```
//!
//! namely `x(t) = L(t) (e^{1/α} x0 + 𝔍_a^t[g / L])` with
//! `L(t) = exp(-(1/α)(t/a)^α)`.
//!
//! Writing `φ(t) = (1/α)(t/a)^α`, one has `dφ = τ^{α-1} dτ / a^α`, hence
//!
//! ```text
//! x(t) = e^{-(φ(t) - φ(a))} x0 + a^α ∫_{φ(a)}^{φ(t)} g e^{-(φ(t) - φ)} dφ.
//! ```
//!
//! The integral is accumulated cell by cell with `g` interpolated linearly in
//! `φ` and the exponential integrated exactly. Every weight is a single
//! exponential of an exponent difference, so nothing overflows for large
//! `T/a`, the work is `O(n)`, and the rule is exact whenever `g` is affine
//! in `φ` (in particular for constant `g`).

use crate::conformable::{conformable_derivative, weight_exponent, Alpha};
use crate::error::{Error, Result};
use crate::grid::GridFunction;

/// Weights `(w0, w1)` with `∫_0^δ (p0 (1 - s/δ) + p1 s/δ) e^{s-δ} ds = p0 w0 + p1 w1`.
pub(crate) fn cell_weights(delta: f64) -> (f64, f64) {
    let one_minus_e = -(-delta).exp_m1();
    let w1 = if delta < 0.05 {
        // (δ - (1 - e^{-δ})) / δ = Σ_{k≥1} (-1)^{k+1} δ^k / (k+1)!
        let mut term = 1.0;
        let mut sum = 0.0;
        for k in 1..=12 {
            term *= -delta / (k + 1) as f64;
            sum -= term;
        }
        sum
    } else {
        (delta - one_minus_e) / delta
    };
    (one_minus_e - w1, w1)
}

/// Grid samples of the closed-form solution with forcing `g` and `x(a) = x0`.
///
/// `x(a) = x0` holds bit-for-bit.
pub fn solve_linear(g: &GridFunction, x0: f64, alpha: Alpha) -> Result<GridFunction> {
    if !x0.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "initial value must be finite, got {x0}"
        )));
    }
    let grid = g.grid();
    let a = grid.a();
    let a_pow = a.powf(alpha.value());
    let nodes = grid.nodes();
    let gv = g.values();
    let phi: Vec<f64> = nodes
        .iter()
        .map(|&t| weight_exponent(t, alpha, a))
        .collect();

    let mut x = Vec::with_capacity(nodes.len());
    x.push(x0);
    let mut prev = x0;
    for i in 0..nodes.len() - 1 {
        let delta = phi[i + 1] - phi[i];
        let decay = (-delta).exp();
        let (w0, w1) = cell_weights(delta);
        let next = decay * prev + a_pow * (w0 * gv[i] + w1 * gv[i + 1]);
        if !next.is_finite() {
            return Err(Error::Range {
                index: i + 1,
                t: nodes[i + 1],
            });
        }
        x.push(next);
        prev = next;
    }
    GridFunction::new(grid.clone(), x)
}

/// `sup` over interior nodes of `|x^(α) + x / a^α - g|`.
pub fn linear_residual(x: &GridFunction, g: &GridFunction, alpha: Alpha) -> Result<f64> {
    x.ensure_same_grid(g)?;
    let a_pow = x.grid().a().powf(alpha.value());
    let dx = conformable_derivative(x, alpha)?;
    let n = x.len();
    Ok((1..n - 1)
        .map(|i| (dx.value(i) + x.value(i) / a_pow - g.value(i)).abs())
        .fold(0.0, f64::max))
}
