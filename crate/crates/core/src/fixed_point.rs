//! The fixed-point operator `K` and its damped Picard iteration.
//!
//! For a tube `(v, M)` and the truncation `ũ` of `u` onto it,
//!
//! ```text
//! K(u)(t) = L(t) (e^{1/α} u_a + 𝔍_a^t[(g(s, ũ) + ũ(s)/a^α) / L(s)]),
//! ```
//!
//! i.e. `K(u)` solves `x^(α) + x/a^α = g(·, ũ) + ũ/a^α` with `x(a) = u_a`.
//! A fixed point inside the tube solves the thermistor problem itself.
//!
//! [`oracle_solve`] is an independent check: it rewrites the problem as the
//! classical ODE `u' = λ t^{α-1} f(t, u) / D`, integrates it with RK4 for a
//! frozen nonlocal factor `D`, and iterates on `D` alone. It shares no code
//! with the conformable operators.

use crate::conformable::conformable_derivative;
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::linear::{linear_residual, solve_linear};
use crate::model::{bounds_estimate, evaluate_g, Bounds, ThermistorProblem};
use crate::tube::{membership, truncate, verify_tube, Tube, TubeReport};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Mixing weight in `u ← (1 - d) u + d K(u)`, `0 < d ≤ 1`.
    pub damping: f64,
    /// Stop once `sup |u^{k+1} - u^k| ≤ tol_fp`.
    pub tol_fp: f64,
    pub max_iter: usize,
    pub grid_n: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            damping: 1.0,
            tol_fp: 1e-10,
            max_iter: 200,
            grid_n: 1001,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "damping must lie in (0, 1], got {}",
                self.damping
            )));
        }
        if !(self.tol_fp > 0.0 && self.tol_fp.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "tol_fp must be positive, got {}",
                self.tol_fp
            )));
        }
        if self.max_iter < 1 {
            return Err(Error::InvalidParameter(
                "max_iter must be at least 1".into(),
            ));
        }
        if self.grid_n < 3 {
            return Err(Error::InvalidParameter(format!(
                "grid_n must be at least 3, got {}",
                self.grid_n
            )));
        }
        Ok(())
    }
}

/// Bound diagnostics are skipped when fewer than this many lattice points
/// per axis are requested.
const BOUNDS_SAMPLES: usize = 64;

#[derive(Debug, Clone)]
pub struct SolveReport {
    /// Final iterate.
    pub u: GridFunction,
    pub iterations: usize,
    pub converged: bool,
    /// `sup |u^{k+1} - u^k|` for each iteration. Not necessarily monotone.
    pub fp_residuals: Vec<f64>,
    /// `sup` over interior nodes of `|u^(α) - g(t, u)|`.
    pub ode_residual: f64,
    /// Residual of the final iterate in the truncated linear problem
    /// `u^(α) + u/a^α = g(·, ũ) + ũ/a^α`.
    pub modified_residual: f64,
    pub member_of_tube: bool,
    pub membership_slack: f64,
    /// `A`, `B`, `G` over `[a, T] × [-R, R]` with `R = max(|v| + M)`.
    /// `None` when `f` is not positive on that whole box.
    pub bounds: Option<Bounds>,
    pub tube: TubeReport,
}

impl SolveReport {
    pub fn final_fp_residual(&self) -> f64 {
        self.fp_residuals.last().copied().unwrap_or(f64::INFINITY)
    }
}

fn damping_rhs(problem: &ThermistorProblem, truncated: &GridFunction) -> Result<GridFunction> {
    let a_pow = problem.a().powf(problem.alpha().value());
    let g = evaluate_g(problem, truncated)?;
    g.zip_with(truncated, |g, u| g + u / a_pow)
}

/// One application of `K`. Depends on `u` only through `truncate(u, tube)`,
/// and `K(u)(a) = u_a` exactly.
pub fn apply_k(u: &GridFunction, tube: &Tube, problem: &ThermistorProblem) -> Result<GridFunction> {
    let truncated = truncate(u, tube)?;
    let rhs = damping_rhs(problem, &truncated)?;
    solve_linear(&rhs, problem.u_a(), problem.alpha())
}

/// `sup` over interior nodes of `|u^(α) - g(t, u)|`.
pub fn ode_residual(u: &GridFunction, problem: &ThermistorProblem) -> Result<f64> {
    let du = conformable_derivative(u, problem.alpha())?;
    let g = evaluate_g(problem, u)?;
    Ok((1..u.len() - 1)
        .map(|i| (du.value(i) - g.value(i)).abs())
        .fold(0.0, f64::max))
}

/// Damped Picard iteration of `K` from the tube center.
///
/// The tube is verified first; an invalid tube is recorded in the report
/// rather than rejected. Running out of iterations is reported through
/// `converged = false`.
pub fn picard_solve(
    problem: &ThermistorProblem,
    tube: &Tube,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    opts.validate()?;
    if tube.grid().len() != opts.grid_n {
        return Err(Error::InvalidParameter(format!(
            "tube has {} nodes but grid_n = {}",
            tube.grid().len(),
            opts.grid_n
        )));
    }
    let tube_report = verify_tube(tube, problem, None)?;

    // Start from v, anchored at u_a so every iterate satisfies u(a) = u_a.
    let mut start = tube.center().values().to_vec();
    start[0] = problem.u_a();
    let mut u = GridFunction::new(tube.grid().clone(), start)?;

    let mut fp_residuals = Vec::new();
    let mut converged = false;
    for iteration in 1..=opts.max_iter {
        let ku = apply_k(&u, tube, problem).map_err(|e| Error::Iteration {
            iteration,
            source: Box::new(e),
        })?;
        let next = u.zip_with(&ku, |x, k| x + opts.damping * (k - x))?;
        let residual = next.sup_distance(&u)?;
        fp_residuals.push(residual);
        u = next;
        if residual <= opts.tol_fp {
            converged = true;
            break;
        }
    }

    let h = tube.grid().h();
    let membership_slack = 10.0 * h * h;
    let member_of_tube = membership(&u, tube, membership_slack)?;
    let ode_residual = ode_residual(&u, problem)?;
    let truncated = truncate(&u, tube)?;
    let modified_residual =
        linear_residual(&u, &damping_rhs(problem, &truncated)?, problem.alpha())?;

    let radius = tube
        .center()
        .values()
        .iter()
        .zip(tube.radius().values())
        .map(|(v, m)| v.abs() + m)
        .fold(0.0, f64::max);
    let bounds = if radius > 0.0 {
        bounds_estimate(problem, radius, BOUNDS_SAMPLES).ok()
    } else {
        None
    };

    Ok(SolveReport {
        iterations: fp_residuals.len(),
        u,
        converged,
        fp_residuals,
        ode_residual,
        modified_residual,
        member_of_tube,
        membership_slack,
        bounds,
        tube: tube_report,
    })
}

#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub u: GridFunction,
    /// Final nonlocal factor `D = (∫ f(x, u(x)) dx)²`.
    pub denominator: f64,
    pub outer_iterations: usize,
    pub converged: bool,
}

fn oracle_rhs(
    problem: &ThermistorProblem,
    t: f64,
    u: f64,
    scale: f64,
    index: usize,
) -> Result<f64> {
    let f = problem.source_value(index, t, u)?;
    Ok(scale * t.powf(problem.alpha().value() - 1.0) * f)
}

fn oracle_denominator(problem: &ThermistorProblem, nodes: &[f64], u: &[f64]) -> Result<f64> {
    let mut s = 0.0;
    for i in 0..nodes.len() - 1 {
        let f0 = problem.source_value(i, nodes[i], u[i])?;
        let f1 = problem.source_value(i + 1, nodes[i + 1], u[i + 1])?;
        s += 0.5 * (nodes[i + 1] - nodes[i]) * (f0 + f1);
    }
    Ok(s * s)
}

/// Classical RK4 for `u' = λ t^{α-1} f(t, u) / D` with an outer loop on
/// the nonlocal factor `D`, on an `opts.grid_n` node grid.
pub fn oracle_solve(problem: &ThermistorProblem, opts: &SolveOptions) -> Result<OracleSolution> {
    opts.validate()?;
    let grid = problem.grid(opts.grid_n)?;
    let nodes = grid.nodes();
    let n = nodes.len();

    let mut u = vec![problem.u_a(); n];
    let mut denominator = oracle_denominator(problem, nodes, &u)?;
    let mut converged = false;
    let mut outer_iterations = 0;
    while outer_iterations < opts.max_iter {
        outer_iterations += 1;
        let scale = problem.lambda() / denominator;
        u[0] = problem.u_a();
        for i in 0..n - 1 {
            let (t, h) = (nodes[i], nodes[i + 1] - nodes[i]);
            let y = u[i];
            let k1 = oracle_rhs(problem, t, y, scale, i)?;
            let k2 = oracle_rhs(problem, t + 0.5 * h, y + 0.5 * h * k1, scale, i)?;
            let k3 = oracle_rhs(problem, t + 0.5 * h, y + 0.5 * h * k2, scale, i)?;
            let k4 = oracle_rhs(problem, t + h, y + h * k3, scale, i + 1)?;
            u[i + 1] = y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        let next = oracle_denominator(problem, nodes, &u)?;
        let change = (next - denominator).abs();
        denominator = next;
        if change <= opts.tol_fp * denominator {
            converged = true;
            break;
        }
    }

    Ok(OracleSolution {
        u: GridFunction::new(grid, u)?,
        denominator,
        outer_iterations,
        converged,
    })
}
