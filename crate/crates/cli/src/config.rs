//! Sectioned `key = value` configuration files.
//!
//! ```text
//! # comments run to the end of the line
//! [problem]
//! a = 1
//! T = 2
//! lambda = 1
//! alpha = 0.5
//! u_a = 0
//! f = 2 + sin(u)
//!
//! [tube]
//! v = closed_form_center      # or an expression in t
//! M = 0.5 + 2*(t - 1)
//!
//! [solver]                    # optional, defaults shown
//! grid_n = 1001
//! damping = 1
//! tol_fp = 1e-10
//! max_iter = 200
//!
//! [sweep]                     # only read by `sweep`
//! lambda = 0.5, 1, 2
//! alpha = 0.5, 0.9
//! ```
//!
//! Keys are case sensitive. Unknown sections, unknown keys and repeated keys
//! are errors, so a typo never silently falls back to a default.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use thermistor_core::expr::{parse_expr, Var};
use thermistor_core::{
    closed_form_center, Alpha, Expr, Grid, GridFunction, SolveOptions, ThermistorProblem, Tube,
};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone)]
pub enum CenterSpec {
    ClosedForm,
    Expr(Expr),
}

#[derive(Debug, Clone)]
pub struct Config {
    pub a: f64,
    pub end: f64,
    pub lambda: Option<f64>,
    pub alpha: Option<f64>,
    pub u_a: f64,
    pub f: Expr,
    pub center: CenterSpec,
    pub radius: Expr,
    pub solver: SolveOptions,
    pub sweep_lambda: Option<Vec<f64>>,
    pub sweep_alpha: Option<Vec<f64>>,
}

const SECTIONS: &[(&str, &[&str])] = &[
    ("problem", &["a", "T", "lambda", "alpha", "u_a", "f"]),
    ("tube", &["v", "M"]),
    ("solver", &["grid_n", "damping", "tol_fp", "max_iter"]),
    ("sweep", &["lambda", "alpha"]),
];

struct Entry {
    line: usize,
    value: String,
}

struct Raw {
    entries: BTreeMap<(String, String), Entry>,
}

impl Raw {
    fn parse(text: &str) -> CliResult<Self> {
        let mut entries = BTreeMap::new();
        let mut section: Option<&str> = None;
        for (idx, raw_line) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw_line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| CliError::config(line, "unterminated section header"))?
                    .trim();
                let known = SECTIONS
                    .iter()
                    .find(|(s, _)| *s == name)
                    .ok_or_else(|| CliError::config(line, format!("unknown section [{name}]")))?;
                section = Some(known.0);
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| {
                CliError::config(line, format!("expected `key = value`, found `{content}`"))
            })?;
            let key = key.trim();
            let value = value.trim();
            let sec = section.ok_or_else(|| {
                CliError::config(line, format!("key `{key}` appears before any section"))
            })?;
            let keys = SECTIONS
                .iter()
                .find(|(s, _)| *s == sec)
                .map(|(_, k)| *k)
                .unwrap_or(&[]);
            if !keys.contains(&key) {
                return Err(CliError::config(
                    line,
                    format!("unknown key `{key}` in [{sec}]"),
                ));
            }
            let slot = (sec.to_string(), key.to_string());
            if let Some(prev) = entries.get(&slot) {
                let prev: &Entry = prev;
                return Err(CliError::config(
                    line,
                    format!(
                        "duplicate key `{key}` in [{sec}] (first set on line {})",
                        prev.line
                    ),
                ));
            }
            entries.insert(
                slot,
                Entry {
                    line,
                    value: value.to_string(),
                },
            );
        }
        Ok(Raw { entries })
    }

    fn get(&self, section: &str, key: &str) -> Option<&Entry> {
        self.entries.get(&(section.to_string(), key.to_string()))
    }

    fn required(&self, section: &str, key: &str) -> CliResult<&Entry> {
        self.get(section, key)
            .ok_or_else(|| CliError::Config(format!("missing key `{key}` in [{section}]")))
    }

    fn number(&self, section: &str, key: &str) -> CliResult<Option<f64>> {
        self.get(section, key)
            .map(|e| parse_number(e, key))
            .transpose()
    }

    fn required_number(&self, section: &str, key: &str) -> CliResult<f64> {
        parse_number(self.required(section, key)?, key)
    }

    fn expr(&self, section: &str, key: &str) -> CliResult<Expr> {
        let e = self.required(section, key)?;
        parse_expr(&e.value).map_err(|err| CliError::config(e.line, format!("`{key}`: {err}")))
    }

    fn list(&self, section: &str, key: &str) -> CliResult<Option<Vec<f64>>> {
        let Some(e) = self.get(section, key) else {
            return Ok(None);
        };
        if e.value.is_empty() {
            return Err(CliError::config(e.line, format!("`{key}` list is empty")));
        }
        e.value
            .split(',')
            .map(|item| {
                let item = item.trim();
                parse_finite(item).ok_or_else(|| {
                    CliError::config(e.line, format!("`{key}`: `{item}` is not a finite number"))
                })
            })
            .collect::<CliResult<Vec<_>>>()
            .map(Some)
    }
}

fn parse_finite(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn parse_number(e: &Entry, key: &str) -> CliResult<f64> {
    parse_finite(&e.value).ok_or_else(|| {
        CliError::config(
            e.line,
            format!("`{key}`: `{}` is not a finite number", e.value),
        )
    })
}

fn parse_count(e: &Entry, key: &str) -> CliResult<usize> {
    e.value.parse::<usize>().map_err(|_| {
        CliError::config(
            e.line,
            format!("`{key}`: `{}` is not a non-negative integer", e.value),
        )
    })
}

fn sample_expr(grid: &Grid, e: &Expr, key: &str) -> CliResult<GridFunction> {
    let values = grid
        .nodes()
        .iter()
        .map(|&t| e.eval(t, 0.0))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|err| CliError::Config(format!("tube `{key}`: {err}")))?;
    Ok(GridFunction::new(grid.clone(), values)?)
}

fn reject_u(e: &Expr, raw: &Raw, key: &str) -> CliResult<()> {
    if e.uses(Var::U) {
        let line = raw.get("tube", key).map(|e| e.line).unwrap_or(0);
        return Err(CliError::config(
            line,
            format!("tube `{key}` must depend on t only"),
        ));
    }
    Ok(())
}

impl Config {
    pub fn from_path(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        text.parse()
    }

    pub fn lambda(&self) -> CliResult<f64> {
        self.lambda
            .ok_or_else(|| CliError::Config("missing key `lambda` in [problem]".into()))
    }

    pub fn alpha(&self) -> CliResult<f64> {
        self.alpha
            .ok_or_else(|| CliError::Config("missing key `alpha` in [problem]".into()))
    }

    pub fn problem(&self, lambda: f64, alpha: f64) -> CliResult<ThermistorProblem> {
        Ok(ThermistorProblem::new(
            self.a,
            self.end,
            lambda,
            Alpha::new(alpha)?,
            self.u_a,
            Arc::new(self.f.clone()),
        )?)
    }

    /// The problem with the scalar `lambda` and `alpha` of `[problem]`.
    pub fn base_problem(&self) -> CliResult<ThermistorProblem> {
        self.problem(self.lambda()?, self.alpha()?)
    }

    pub fn tube(&self, problem: &ThermistorProblem) -> CliResult<Tube> {
        let grid = problem.grid(self.solver.grid_n)?;
        let center = match &self.center {
            CenterSpec::ClosedForm => closed_form_center(problem, &grid)?,
            CenterSpec::Expr(e) => sample_expr(&grid, e, "v")?,
        };
        let radius = sample_expr(&grid, &self.radius, "M")?;
        Ok(Tube::new(center, radius)?)
    }

    /// Sweep lists in declaration order. A list missing from `[sweep]`
    /// falls back to the scalar in `[problem]`.
    pub fn sweep_lists(&self) -> CliResult<(Vec<f64>, Vec<f64>)> {
        if self.sweep_lambda.is_none() && self.sweep_alpha.is_none() {
            return Err(CliError::Config(
                "sweep needs a [sweep] section with `lambda` and/or `alpha`".into(),
            ));
        }
        let lambdas = match &self.sweep_lambda {
            Some(l) => l.clone(),
            None => vec![self.lambda()?],
        };
        let alphas = match &self.sweep_alpha {
            Some(a) => a.clone(),
            None => vec![self.alpha()?],
        };
        Ok((lambdas, alphas))
    }
}

impl std::str::FromStr for Config {
    type Err = CliError;

    fn from_str(text: &str) -> CliResult<Self> {
        let raw = Raw::parse(text)?;

        let center_entry = raw.required("tube", "v")?;
        let center = if center_entry.value == "closed_form_center" {
            CenterSpec::ClosedForm
        } else {
            let e = raw.expr("tube", "v")?;
            reject_u(&e, &raw, "v")?;
            CenterSpec::Expr(e)
        };
        let radius = raw.expr("tube", "M")?;
        reject_u(&radius, &raw, "M")?;

        let defaults = SolveOptions::default();
        let solver = SolveOptions {
            grid_n: raw
                .get("solver", "grid_n")
                .map(|e| parse_count(e, "grid_n"))
                .transpose()?
                .unwrap_or(defaults.grid_n),
            damping: raw.number("solver", "damping")?.unwrap_or(defaults.damping),
            tol_fp: raw.number("solver", "tol_fp")?.unwrap_or(defaults.tol_fp),
            max_iter: raw
                .get("solver", "max_iter")
                .map(|e| parse_count(e, "max_iter"))
                .transpose()?
                .unwrap_or(defaults.max_iter),
        };
        solver.validate()?;

        Ok(Config {
            a: raw.required_number("problem", "a")?,
            end: raw.required_number("problem", "T")?,
            lambda: raw.number("problem", "lambda")?,
            alpha: raw.number("problem", "alpha")?,
            u_a: raw.required_number("problem", "u_a")?,
            f: raw.expr("problem", "f")?,
            center,
            radius,
            solver,
            sweep_lambda: raw.list("sweep", "lambda")?,
            sweep_alpha: raw.list("sweep", "alpha")?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "\
[problem]
a = 1
T = 2
lambda = 1
alpha = 0.5
u_a = 0
f = 1

[tube]
v = closed_form_center
M = 0.5
";

    #[test]
    fn parses_minimal_config_with_defaults() {
        let c: Config = BASE.parse().unwrap();
        assert_eq!(
            (c.a, c.end, c.lambda, c.alpha, c.u_a),
            (1.0, 2.0, Some(1.0), Some(0.5), 0.0)
        );
        assert!(matches!(c.center, CenterSpec::ClosedForm));
        assert_eq!(c.solver, SolveOptions::default());
        assert!(c.sweep_lambda.is_none());
    }

    #[test]
    fn comments_and_whitespace() {
        let text =
            format!("# header\n{BASE}\n[solver]  # tuning\n  grid_n=  401 \nmax_iter = 7 # few\n");
        let c: Config = text.parse().unwrap();
        assert_eq!(c.solver.grid_n, 401);
        assert_eq!(c.solver.max_iter, 7);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases = [
            (format!("{BASE}[solver]\ngrid_n = many\n"), "line 13"),
            (format!("{BASE}[extra]\n"), "unknown section [extra]"),
            (format!("{BASE}[problem]\nb = 3\n"), "unknown key `b`"),
            (format!("{BASE}[problem]\na = 3\n"), "duplicate key `a`"),
            ("a = 1\n".to_string(), "before any section"),
            (BASE.replace("f = 1", "f = 1 +"), "parse error at byte 3"),
            (BASE.replace("M = 0.5", "M = u"), "depend on t only"),
            (BASE.replace("T = 2", "T = inf"), "not a finite number"),
            (format!("{BASE}[sweep]\nlambda =\n"), "list is empty"),
            (
                format!("{BASE}[sweep]\nlambda = 1, x\n"),
                "`x` is not a finite number",
            ),
        ];
        for (text, needle) in cases {
            let err = text.parse::<Config>().expect_err(needle).to_string();
            assert!(err.contains(needle), "{err} should mention {needle}");
        }
    }

    #[test]
    fn missing_keys_are_named() {
        let err = BASE.replace("u_a = 0\n", "").parse::<Config>().unwrap_err();
        assert!(err.to_string().contains("`u_a`"));
        let c: Config = BASE.replace("lambda = 1\n", "").parse().unwrap();
        assert!(c
            .base_problem()
            .unwrap_err()
            .to_string()
            .contains("`lambda`"));
    }

    #[test]
    fn sweep_lists_fall_back_to_scalars() {
        let c: Config = format!("{BASE}[sweep]\nlambda = 0.5, 1,2\n")
            .parse()
            .unwrap();
        assert_eq!(c.sweep_lists().unwrap(), (vec![0.5, 1.0, 2.0], vec![0.5]));
        let c: Config = BASE.parse().unwrap();
        assert!(c.sweep_lists().is_err());
    }

    #[test]
    fn expression_tube_is_sampled_on_the_solver_grid() {
        let text = BASE
            .replace("v = closed_form_center", "v = 0.1 * t")
            .replace("M = 0.5", "M = 0.5 + 2*(t - 1)");
        let c: Config = format!("{text}[solver]\ngrid_n = 11\n").parse().unwrap();
        let p = c.base_problem().unwrap();
        let tube = c.tube(&p).unwrap();
        assert_eq!(tube.grid().len(), 11);
        assert!((tube.center().last() - 0.2).abs() < 1e-15);
        assert!((tube.radius().last() - 2.5).abs() < 1e-15);
    }

    #[test]
    fn negative_radius_is_a_config_error() {
        let c: Config = BASE.replace("M = 0.5", "M = 1 - t").parse().unwrap();
        let p = c.base_problem().unwrap();
        assert!(c.tube(&p).is_err());
    }
}
