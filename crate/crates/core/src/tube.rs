//! Tube solutions `(v, M)`: radial truncation onto the tube, membership,
//! verification of the three tube conditions, and a grid check of the sign
//! lemma used to show that solutions stay inside a tube.

use std::fmt;

use crate::conformable::{conformable_derivative, weight_exponent, Alpha};
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::model::{evaluate_g, ThermistorProblem};

/// Candidate tube: center `v` and nonnegative radius `M` on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Tube {
    center: GridFunction,
    radius: GridFunction,
}

impl Tube {
    pub fn new(center: GridFunction, radius: GridFunction) -> Result<Self> {
        center.ensure_same_grid(&radius)?;
        if let Some(i) = radius.values().iter().position(|&m| m < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tube radius must be nonnegative, M = {} at node {i}",
                radius.value(i)
            )));
        }
        Ok(Self { center, radius })
    }

    pub fn center(&self) -> &GridFunction {
        &self.center
    }

    pub fn radius(&self) -> &GridFunction {
        &self.radius
    }

    pub fn grid(&self) -> &Grid {
        self.center.grid()
    }
}

fn project(u: f64, v: f64, m: f64) -> f64 {
    let d = u - v;
    if d.abs() <= m {
        return u;
    }
    // d / |d| is exactly ±1.
    let mut p = m * (d / d.abs()) + v;
    // Pull back any rounding excess so the projected point tests as inside.
    while (p - v).abs() > m {
        p = if p > v { p.next_down() } else { p.next_up() };
    }
    p
}

/// Radial projection `ũ` of `u` onto the tube:
/// `ũ = v + M (u - v) / |u - v|` where `|u - v| > M`, and `u` elsewhere.
///
/// The result satisfies `|ũ - v| ≤ M` exactly in floating point, and
/// truncation is idempotent bit-for-bit.
pub fn truncate(u: &GridFunction, tube: &Tube) -> Result<GridFunction> {
    u.ensure_same_grid(&tube.center)?;
    let values = u
        .values()
        .iter()
        .zip(tube.center.values())
        .zip(tube.radius.values())
        .map(|((&u, &v), &m)| project(u, v, m))
        .collect();
    GridFunction::new(u.grid().clone(), values)
}

/// `|u_i - v_i| ≤ M_i + slack` at every node.
pub fn membership(u: &GridFunction, tube: &Tube, slack: f64) -> Result<bool> {
    u.ensure_same_grid(&tube.center)?;
    Ok(u.values()
        .iter()
        .zip(tube.center.values())
        .zip(tube.radius.values())
        .all(|((&u, &v), &m)| (u - v).abs() <= m + slack))
}

/// The three tube conditions, plus the frozen-denominator reading of the
/// first one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    /// `(y - v)(g(t, y) - v^(α)) ≤ M M^(α)` on `|y - v| = M`; `g(t_i, y)`
    /// recomputes the nonlocal integral with node `i` moved to `y`.
    Boundary,
    /// The same inequality with the integral frozen at `u = v`. Reported for
    /// comparison, not part of the verdict.
    BoundaryFrozen,
    /// Where `M = 0`: `v^(α) = g(t, v)` and `M^(α) = 0`.
    ZeroRadius,
    /// `|u_a - v(a)| ≤ M(a)`.
    Initial,
}

impl Condition {
    pub fn label(self) -> &'static str {
        match self {
            Condition::Boundary => "i",
            Condition::BoundaryFrozen => "i_frozen",
            Condition::ZeroRadius => "ii",
            Condition::Initial => "iii",
        }
    }
}

/// Worst case of one condition over the grid. The condition holds when
/// `margin ≤ tol`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionCheck {
    pub condition: Condition,
    pub margin: f64,
    pub node: Option<usize>,
    pub t: Option<f64>,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TubeReport {
    pub tol: f64,
    pub checks: Vec<ConditionCheck>,
    pub valid: bool,
}

impl TubeReport {
    pub fn check(&self, condition: Condition) -> &ConditionCheck {
        self.checks
            .iter()
            .find(|c| c.condition == condition)
            .expect("every condition is reported")
    }

    /// Conditions that count towards the verdict and failed.
    pub fn failed(&self) -> impl Iterator<Item = &ConditionCheck> {
        self.checks
            .iter()
            .filter(|c| c.condition != Condition::BoundaryFrozen && !c.satisfied)
    }

    pub const CSV_HEADER: &'static str = "condition,worst_margin,node,t,satisfied";

    /// One CSV line per condition, matching [`Self::CSV_HEADER`].
    pub fn csv_rows(&self) -> Vec<String> {
        self.checks
            .iter()
            .map(|c| {
                format!(
                    "{},{},{},{},{}",
                    c.condition.label(),
                    c.margin,
                    c.node.map(|n| n.to_string()).unwrap_or_default(),
                    c.t.map(|t| t.to_string()).unwrap_or_default(),
                    c.satisfied
                )
            })
            .collect()
    }
}

impl fmt::Display for TubeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "tube verdict: {} (tol = {:e})",
            if self.valid { "valid" } else { "INVALID" },
            self.tol
        )?;
        for c in &self.checks {
            let at = match (c.node, c.t) {
                (Some(n), Some(t)) => format!("node {n} (t = {t})"),
                _ => "-".to_string(),
            };
            writeln!(
                f,
                "  condition ({:<8}) worst margin {:>+.6e} at {:<28} {}",
                c.condition.label(),
                c.margin,
                at,
                if c.satisfied { "ok" } else { "FAILED" }
            )?;
        }
        Ok(())
    }
}

#[derive(Default)]
struct Worst {
    margin: Option<f64>,
    node: Option<usize>,
}

impl Worst {
    fn offer(&mut self, margin: f64, node: usize) {
        if self.margin.is_none_or(|m| margin > m) {
            self.margin = Some(margin);
            self.node = Some(node);
        }
    }

    fn finish(self, condition: Condition, tol: f64, nodes: &[f64]) -> ConditionCheck {
        let margin = self.margin.unwrap_or(0.0);
        ConditionCheck {
            condition,
            margin,
            node: self.node,
            t: self.node.map(|i| nodes[i]),
            satisfied: margin <= tol,
        }
    }
}

/// Tube center for a source that does not depend on `u`: the solution
/// `u_a + ∫_a^t s^{α-1} g(s) ds`, integrated by the trapezoidal rule in the
/// variable `φ = (1/α)(t/a)^α`. The quadrature is exact when `f` is
/// constant.
pub fn closed_form_center(problem: &ThermistorProblem, grid: &Grid) -> Result<GridFunction> {
    if problem.source().depends_on_u() {
        return Err(Error::InvalidParameter(
            "the closed-form center needs a source that does not depend on u".into(),
        ));
    }
    let alpha = problem.alpha();
    let a = problem.a();
    let g = evaluate_g(problem, &grid.constant(problem.u_a())?)?;
    let a_pow = a.powf(alpha.value());
    let phi: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|&t| weight_exponent(t, alpha, a))
        .collect();
    let mut acc = 0.0;
    let mut v = Vec::with_capacity(grid.len());
    v.push(problem.u_a());
    for i in 0..grid.len() - 1 {
        acc += 0.5 * (phi[i + 1] - phi[i]) * (g.value(i) + g.value(i + 1));
        v.push(problem.u_a() + a_pow * acc);
    }
    GridFunction::new(grid.clone(), v)
}

/// Default verification tolerance `10 h²`.
pub fn default_tolerance(tube: &Tube) -> f64 {
    let h = tube.grid().h();
    10.0 * h * h
}

/// Checks the tube conditions at every node. `tol` defaults to `10 h²`.
pub fn verify_tube(
    tube: &Tube,
    problem: &ThermistorProblem,
    tol: Option<f64>,
) -> Result<TubeReport> {
    let tol = tol.unwrap_or_else(|| default_tolerance(tube));
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let alpha = problem.alpha();
    let grid = tube.grid();
    let nodes = grid.nodes();
    let v = tube.center.values();
    let m = tube.radius.values();
    let dv = conformable_derivative(&tube.center, alpha)?;
    let dm = conformable_derivative(&tube.radius, alpha)?;

    let f_center = problem.sample_source(&tube.center)?;
    let w = grid.trapezoid_weights();
    let integral: f64 = w.iter().zip(&f_center).map(|(w, f)| w * f).sum();
    let lambda = problem.lambda();

    let mut boundary = Worst::default();
    let mut frozen = Worst::default();
    for i in 0..nodes.len() {
        let rhs = m[i] * dm.value(i);
        for sign in [1.0, -1.0] {
            let y = v[i] + sign * m[i];
            let f_y = problem.source_value(i, nodes[i], y)?;
            // Same sum as a fresh trapezoid pass with u = v except u_i = y.
            let s = integral - w[i] * f_center[i] + w[i] * f_y;
            let g_local = lambda * f_y / (s * s);
            let g_frozen = lambda * f_y / (integral * integral);
            boundary.offer((y - v[i]) * (g_local - dv.value(i)) - rhs, i);
            frozen.offer((y - v[i]) * (g_frozen - dv.value(i)) - rhs, i);
        }
    }

    let g_center = evaluate_g(problem, &tube.center)?;
    let mut zero = Worst::default();
    for i in (0..nodes.len()).filter(|&i| m[i] <= tol) {
        let gap = (dv.value(i) - g_center.value(i)).abs();
        zero.offer(gap.max(dm.value(i).abs()), i);
    }

    let mut initial = Worst::default();
    initial.offer((problem.u_a() - v[0]).abs() - m[0], 0);

    let checks = vec![
        boundary.finish(Condition::Boundary, tol, nodes),
        zero.finish(Condition::ZeroRadius, tol, nodes),
        initial.finish(Condition::Initial, tol, nodes),
        frozen.finish(Condition::BoundaryFrozen, tol, nodes),
    ];
    let valid = checks
        .iter()
        .filter(|c| c.condition != Condition::BoundaryFrozen)
        .all(|c| c.satisfied);
    Ok(TubeReport { tol, checks, valid })
}

/// Outcome of checking the sign lemma on a grid function `r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayLemma {
    /// `r(a) > tol`, or `r^(α) ≥ 0` at this node although `r > tol` there.
    HypothesisNotSatisfied { node: usize },
    /// `r ≤ tol` everywhere.
    ConclusionHolds,
    /// Hypothesis satisfied but `r > tol` at this node.
    Violated { node: usize },
}

/// Grid form of the sign lemma: if `r^(α) < 0` wherever `r > 0` and
/// `r(a) ≤ 0`, then `r ≤ 0` on the whole interval.
pub fn decay_lemma(r: &GridFunction, alpha: Alpha, tol: f64) -> Result<DecayLemma> {
    if r.first() > tol {
        return Ok(DecayLemma::HypothesisNotSatisfied { node: 0 });
    }
    let dr = conformable_derivative(r, alpha)?;
    let positive: Vec<usize> = (0..r.len()).filter(|&i| r.value(i) > tol).collect();
    if let Some(&node) = positive.iter().find(|&&i| dr.value(i) >= 0.0) {
        return Ok(DecayLemma::HypothesisNotSatisfied { node });
    }
    Ok(match positive.first() {
        None => DecayLemma::ConclusionHolds,
        Some(&node) => DecayLemma::Violated { node },
    })
}

/// `true` unless the lemma's hypothesis holds on the grid while its
/// conclusion fails.
pub fn check_decay_lemma(r: &GridFunction, alpha: Alpha, tol: f64) -> Result<bool> {
    Ok(!matches!(
        decay_lemma(r, alpha, tol)?,
        DecayLemma::Violated { .. }
    ))
}
