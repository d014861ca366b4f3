//! The nonlocal thermistor problem
//!
//! ```text
//! u^(α)(t) = g(t, u) = λ f(t, u(t)) / (∫_a^T f(x, u(x)) dx)²,   u(a) = u_a,
//! ```
//!
//! with a continuous, strictly positive source `f` (hypothesis H1).
//! Positivity is enforced on every sample the solver touches.

use std::fmt;
use std::sync::Arc;

use crate::conformable::Alpha;
use crate::error::{Error, Result};
use crate::expr::{Expr, Var};
use crate::grid::{Grid, GridFunction};

/// A source term `f(t, u)`. Implementations must be re-entrant.
pub trait Source: fmt::Debug + Send + Sync {
    fn eval(&self, t: f64, u: f64) -> Result<f64>;

    /// Whether `f` may vary with `u`. A `false` here is a promise.
    fn depends_on_u(&self) -> bool {
        true
    }
}

impl Source for Expr {
    fn eval(&self, t: f64, u: f64) -> Result<f64> {
        Expr::eval(self, t, u).map_err(|source| Error::Source { t, u, source })
    }

    fn depends_on_u(&self) -> bool {
        self.uses(Var::U)
    }
}

/// Source backed by a plain closure.
pub struct FnSource<F> {
    f: F,
    depends_on_u: bool,
}

impl<F> FnSource<F>
where
    F: Fn(f64, f64) -> f64 + Send + Sync,
{
    pub fn new(f: F) -> Self {
        Self {
            f,
            depends_on_u: true,
        }
    }

    /// A source that ignores `u`.
    pub fn of_t(f: F) -> Self {
        Self {
            f,
            depends_on_u: false,
        }
    }
}

impl<F> fmt::Debug for FnSource<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnSource")
            .field("depends_on_u", &self.depends_on_u)
            .finish_non_exhaustive()
    }
}

impl<F> Source for FnSource<F>
where
    F: Fn(f64, f64) -> f64 + Send + Sync,
{
    fn eval(&self, t: f64, u: f64) -> Result<f64> {
        Ok((self.f)(t, u))
    }

    fn depends_on_u(&self) -> bool {
        self.depends_on_u
    }
}

/// `c · f` for a positive constant `c`.
#[derive(Debug, Clone)]
pub struct Scaled {
    pub factor: f64,
    pub inner: Arc<dyn Source>,
}

impl Source for Scaled {
    fn eval(&self, t: f64, u: f64) -> Result<f64> {
        Ok(self.factor * self.inner.eval(t, u)?)
    }

    fn depends_on_u(&self) -> bool {
        self.inner.depends_on_u()
    }
}

#[derive(Debug, Clone)]
pub struct ThermistorProblem {
    a: f64,
    end: f64,
    lambda: f64,
    alpha: Alpha,
    u_a: f64,
    source: Arc<dyn Source>,
}

impl ThermistorProblem {
    pub fn new(
        a: f64,
        end: f64,
        lambda: f64,
        alpha: Alpha,
        u_a: f64,
        source: Arc<dyn Source>,
    ) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "a must be positive, got {a}"
            )));
        }
        if !(end > a && end.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "T must be finite and exceed a = {a}, got {end}"
            )));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        if !u_a.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "u_a must be finite, got {u_a}"
            )));
        }
        Ok(Self {
            a,
            end,
            lambda,
            alpha,
            u_a,
            source,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn alpha(&self) -> Alpha {
        self.alpha
    }

    pub fn u_a(&self) -> f64 {
        self.u_a
    }

    pub fn source(&self) -> &Arc<dyn Source> {
        &self.source
    }

    pub fn with_source(&self, source: Arc<dyn Source>) -> Self {
        Self {
            source,
            ..self.clone()
        }
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(
            self.a,
            self.end,
            lambda,
            self.alpha,
            self.u_a,
            self.source.clone(),
        )
    }

    pub fn with_alpha(&self, alpha: Alpha) -> Self {
        Self {
            alpha,
            ..self.clone()
        }
    }

    /// Uniform grid on `[a, T]` with `n` nodes.
    pub fn grid(&self, n: usize) -> Result<Grid> {
        Grid::new(self.a, self.end, n)
    }

    /// `f(t, u)`, rejected unless finite and strictly positive.
    pub fn source_value(&self, index: usize, t: f64, u: f64) -> Result<f64> {
        let value = self.source.eval(t, u)?;
        if value > 0.0 && value.is_finite() {
            Ok(value)
        } else {
            Err(Error::H1Violated { index, t, u, value })
        }
    }

    fn check_grid(&self, grid: &Grid) -> Result<()> {
        let scale = self.end.abs().max(self.a);
        let tol = 64.0 * f64::EPSILON * scale;
        if (grid.a() - self.a).abs() > tol || (grid.end() - self.end).abs() > tol {
            return Err(Error::InvalidParameter(format!(
                "grid spans [{}, {}] but the problem lives on [{}, {}]",
                grid.a(),
                grid.end(),
                self.a,
                self.end
            )));
        }
        Ok(())
    }

    /// `f(t_i, u_i)` at every node, each checked against H1.
    pub fn sample_source(&self, u: &GridFunction) -> Result<Vec<f64>> {
        self.check_grid(u.grid())?;
        u.grid()
            .nodes()
            .iter()
            .zip(u.values())
            .enumerate()
            .map(|(i, (&t, &v))| self.source_value(i, t, v))
            .collect()
    }
}

/// Trapezoidal `∫_a^T f(x, u(x)) dx` (a plain Riemann integral).
pub fn nonlocal_integral(problem: &ThermistorProblem, u: &GridFunction) -> Result<f64> {
    let f = problem.sample_source(u)?;
    let w = u.grid().trapezoid_weights();
    Ok(w.iter().zip(&f).map(|(w, f)| w * f).sum())
}

/// `(∫_a^T f(x, u(x)) dx)²`, strictly positive under H1.
pub fn nonlocal_denominator(problem: &ThermistorProblem, u: &GridFunction) -> Result<f64> {
    let s = nonlocal_integral(problem, u)?;
    Ok(s * s)
}

/// `g(t_i, u) = λ f(t_i, u_i) / (∫ f(x, u(x)) dx)²` at every node.
pub fn evaluate_g(problem: &ThermistorProblem, u: &GridFunction) -> Result<GridFunction> {
    let f = problem.sample_source(u)?;
    let w = u.grid().trapezoid_weights();
    let s: f64 = w.iter().zip(&f).map(|(w, f)| w * f).sum();
    let scale = problem.lambda() / (s * s);
    GridFunction::new(u.grid().clone(), f.iter().map(|f| scale * f).collect())
}

/// Lattice estimates of `A = min f`, `B = max f` over `[a, T] × [-R, R]`
/// and the resulting bound `G = λ B / (A² (T - a)²)` on `g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
    pub g_bound: f64,
    pub radius: f64,
    pub samples: usize,
}

/// Diagnostics only; never used to steer a solve.
pub fn bounds_estimate(problem: &ThermistorProblem, radius: f64, samples: usize) -> Result<Bounds> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "radius must be positive, got {radius}"
        )));
    }
    if samples < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 samples per axis, got {samples}"
        )));
    }
    let (a, end) = (problem.a(), problem.end());
    let step = |lo: f64, hi: f64, k: usize| {
        if k == samples - 1 {
            hi
        } else {
            lo + (hi - lo) * k as f64 / (samples - 1) as f64
        }
    };
    let mut lower = f64::INFINITY;
    let mut upper = f64::NEG_INFINITY;
    for j in 0..samples {
        let t = step(a, end, j);
        for k in 0..samples {
            let u = step(-radius, radius, k);
            let f = problem.source_value(j * samples + k, t, u)?;
            lower = lower.min(f);
            upper = upper.max(f);
        }
    }
    let len = end - a;
    Ok(Bounds {
        lower,
        upper,
        g_bound: problem.lambda() * upper / (lower * lower * len * len),
        radius,
        samples,
    })
}
