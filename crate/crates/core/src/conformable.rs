//! Conformable fractional derivative and integral on uniform grids.
//!
//! For differentiable `u` and `t > 0` the conformable derivative of order
//! `α` is `T_α u(t) = t^{1-α} u'(t)`. On a grid it is realised with
//! second-order differences: central at interior nodes, three-point
//! one-sided at the two endpoints. The conformable integral
//! `I_α^a u(t) = ∫_a^t u(τ) τ^{α-1} dτ` uses the composite trapezoidal rule,
//! so both operators are `O(h²)` accurate.

use crate::error::{Error, Result};
use crate::grid::GridFunction;

/// Order of the conformable derivative, `0 < α ≤ 1`.
///
/// `α = 1` is admitted so that the classical limit can be exercised.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Alpha(f64);

impl Alpha {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 && value <= 1.0 {
            Ok(Self(value))
        } else {
            Err(Error::InvalidAlpha(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `t^{1-α}`, the factor relating conformable and classical derivatives.
    pub fn scale(self, t: f64) -> f64 {
        if self.0 == 1.0 {
            1.0
        } else {
            t.powf(1.0 - self.0)
        }
    }
}

/// Plain second-order finite-difference derivative `D_h u`.
pub fn classical_derivative(u: &GridFunction) -> Vec<f64> {
    let v = u.values();
    let n = v.len();
    let h = u.grid().h();
    let mut d = Vec::with_capacity(n);
    d.push((-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h));
    for i in 1..n - 1 {
        d.push((v[i + 1] - v[i - 1]) / (2.0 * h));
    }
    d.push((3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h));
    d
}

/// Grid conformable derivative `t_i^{1-α} D_h u(t_i)`.
pub fn conformable_derivative(u: &GridFunction, alpha: Alpha) -> Result<GridFunction> {
    let d = classical_derivative(u);
    let values = u
        .grid()
        .nodes()
        .iter()
        .zip(d)
        .map(|(&t, du)| alpha.scale(t) * du)
        .collect();
    GridFunction::new(u.grid().clone(), values)
}

/// Difference quotient `(f(t + ε t^{1-α}) - f(t)) / ε` from the limit
/// definition. Intended as an independent check of the grid operator.
pub fn conformable_derivative_limit(
    f: impl Fn(f64) -> f64,
    t: f64,
    alpha: Alpha,
    eps: f64,
) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "the limit quotient needs t > 0, got {t}"
        )));
    }
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "step must be positive, got {eps}"
        )));
    }
    let f0 = f(t);
    let f1 = f(t + eps * alpha.scale(t));
    if !f0.is_finite() || !f1.is_finite() {
        return Err(Error::NonFinite {
            what: "function value in limit quotient",
            index: 0,
        });
    }
    Ok((f1 - f0) / eps)
}

fn weighted_integrand(u: &GridFunction, alpha: Alpha) -> Vec<f64> {
    u.grid()
        .nodes()
        .iter()
        .zip(u.values())
        .map(|(&t, &v)| v / alpha.scale(t))
        .collect()
}

/// Trapezoidal `∫_{t_lo}^{t_hi} u(τ) / τ^{1-α} dτ`; both limits must be
/// grid nodes. Serves both as `I_α^a u(t)` and as `𝔍_a^b[u]`.
pub fn conformable_integral(u: &GridFunction, alpha: Alpha, t_lo: f64, t_hi: f64) -> Result<f64> {
    if !(t_lo <= t_hi) {
        return Err(Error::InvalidRange { lo: t_lo, hi: t_hi });
    }
    let grid = u.grid();
    let lo = grid.index_of(t_lo)?;
    let hi = grid.index_of(t_hi)?;
    let w = weighted_integrand(u, alpha);
    let nodes = grid.nodes();
    Ok((lo..hi)
        .map(|i| 0.5 * (nodes[i + 1] - nodes[i]) * (w[i] + w[i + 1]))
        .sum())
}

/// Running conformable integral `I_α^a u(t_i)` at every node, accumulated in
/// one pass.
pub fn cumulative_conformable_integral(u: &GridFunction, alpha: Alpha) -> Result<GridFunction> {
    let w = weighted_integrand(u, alpha);
    let nodes = u.grid().nodes();
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(w.len());
    out.push(0.0);
    for i in 0..w.len() - 1 {
        acc += 0.5 * (nodes[i + 1] - nodes[i]) * (w[i] + w[i + 1]);
        out.push(acc);
    }
    GridFunction::new(u.grid().clone(), out)
}

/// Exponent `(1/α)(t/a)^α` of the decaying weight.
pub fn weight_exponent(t: f64, alpha: Alpha, a: f64) -> f64 {
    (t / a).powf(alpha.value()) / alpha.value()
}

/// `L(t) = exp(-(1/α)(t/a)^α)`, strictly decreasing on `[a, T]` with
/// `L(a) = e^{-1/α}`.
pub fn exp_weight(t: f64, alpha: Alpha, a: f64) -> f64 {
    (-weight_exponent(t, alpha, a)).exp()
}

/// Conformable derivative of `|u|`, i.e. `u · u^(α) / |u|`. Requires `u`
/// to be nonzero at every node.
pub fn abs_alpha_derivative(u: &GridFunction, alpha: Alpha) -> Result<GridFunction> {
    if let Some(index) = u.values().iter().position(|&v| v == 0.0) {
        return Err(Error::SignDegenerate {
            index,
            t: u.grid().node(index),
        });
    }
    let du = conformable_derivative(u, alpha)?;
    u.zip_with(&du, |x, dx| x * dx / x.abs())
}
