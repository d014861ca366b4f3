use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use thermistor_core::conformable::conformable_derivative;
use thermistor_core::model::evaluate_g;
use thermistor_core::tube::verify_tube;
use thermistor_core::{picard_solve, SolveReport, ThermistorProblem, Tube, TubeReport};

use crate::config::Config;
use crate::error::{CliError, CliResult};
use crate::Status;

pub const SOLUTION_HEADER: &str = "t,u,v,M,g,residual";
pub const SWEEP_HEADER: &str = "lambda,alpha,converged,iterations,ode_residual,member";

/// Command-line overrides applied on top of a config file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub grid_n: Option<usize>,
    pub alpha: Option<f64>,
}

impl Overrides {
    /// `--alpha` replaces both the scalar and any sweep list.
    pub fn apply(&self, config: &mut Config) -> CliResult<()> {
        if let Some(n) = self.grid_n {
            config.solver.grid_n = n;
            config.solver.validate()?;
        }
        if let Some(alpha) = self.alpha {
            config.alpha = Some(alpha);
            if config.sweep_alpha.is_some() {
                config.sweep_alpha = Some(vec![alpha]);
            }
        }
        Ok(())
    }
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> CliResult<()> {
    let io = |source| CliError::Io {
        path: dir.join(name).display().to_string(),
        source,
    };
    fs::create_dir_all(dir).map_err(io)?;
    fs::write(dir.join(name), contents).map_err(io)
}

/// Verdict of a finished solve. An invalid tube outranks a failed
/// iteration: the run is still reported, but nothing it produced is
/// backed by the existence argument.
pub fn solve_status(report: &SolveReport) -> Status {
    if !report.tube.valid {
        Status::TubeRejected
    } else if !report.converged {
        Status::NotConverged
    } else if !report.member_of_tube {
        Status::TubeRejected
    } else {
        Status::Ok
    }
}

pub struct Solved {
    pub problem: ThermistorProblem,
    pub tube: Tube,
    pub report: SolveReport,
}

pub fn solve(config: &Config) -> CliResult<Solved> {
    let problem = config.base_problem()?;
    solve_problem(config, problem)
}

fn solve_problem(config: &Config, problem: ThermistorProblem) -> CliResult<Solved> {
    let tube = config.tube(&problem)?;
    let report = picard_solve(&problem, &tube, &config.solver)?;
    Ok(Solved {
        problem,
        tube,
        report,
    })
}

/// One row per node: the iterate, the tube, `g(t, u)` and the pointwise
/// residual `u^(α) - g`.
pub fn solution_csv(solved: &Solved) -> CliResult<String> {
    let u = &solved.report.u;
    let g = evaluate_g(&solved.problem, u)?;
    let du = conformable_derivative(u, solved.problem.alpha())?;
    let mut out = String::with_capacity(64 * u.grid().len());
    out.push_str(SOLUTION_HEADER);
    out.push('\n');
    for (i, &t) in u.grid().nodes().iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            t,
            u.value(i),
            solved.tube.center().value(i),
            solved.tube.radius().value(i),
            g.value(i),
            du.value(i) - g.value(i)
        );
    }
    Ok(out)
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn describe_problem(out: &mut String, config: &Config, problem: &ThermistorProblem) {
    let _ = writeln!(
        out,
        "problem: a = {}, T = {}, lambda = {}, alpha = {}, u_a = {}",
        problem.a(),
        problem.end(),
        problem.lambda(),
        problem.alpha().value(),
        problem.u_a()
    );
    let _ = writeln!(out, "source: f(t, u) = {}", config.f.source());
    let n = config.solver.grid_n;
    let h = (problem.end() - problem.a()) / (n - 1) as f64;
    let _ = writeln!(out, "grid: n = {n}, h = {h}");
}

pub fn solve_report_text(config: &Config, solved: &Solved) -> String {
    let r = &solved.report;
    let s = &config.solver;
    let mut out = String::new();
    describe_problem(&mut out, config, &solved.problem);
    let _ = writeln!(
        out,
        "solver: damping = {}, tol_fp = {}, max_iter = {}",
        s.damping, s.tol_fp, s.max_iter
    );
    out.push('\n');
    out.push_str(&r.tube.to_string());
    out.push('\n');
    let _ = writeln!(out, "iterations: {}", r.iterations);
    let _ = writeln!(out, "converged: {}", yes_no(r.converged));
    let _ = writeln!(out, "fixed-point residual: {}", r.final_fp_residual());
    let _ = writeln!(out, "ode residual: {}", r.ode_residual);
    let _ = writeln!(out, "modified residual: {}", r.modified_residual);
    let _ = writeln!(
        out,
        "member of tube: {} (slack {})",
        yes_no(r.member_of_tube),
        r.membership_slack
    );
    match &r.bounds {
        Some(b) => {
            let _ = writeln!(
                out,
                "bounds on |u| <= {} ({} x {} lattice): A = {}, B = {}, G = {}",
                b.radius, b.samples, b.samples, b.lower, b.upper, b.g_bound
            );
        }
        None => out.push_str("bounds: unavailable (f is not positive on the whole lattice)\n"),
    }
    let _ = writeln!(out, "u(T) = {}", r.u.last());
    let status = solve_status(r);
    let verdict = match status {
        Status::Ok => "converged inside the tube",
        Status::NotConverged => "not converged",
        Status::TubeRejected if !r.tube.valid => "tube rejected",
        Status::TubeRejected => "solution left the tube",
    };
    let _ = writeln!(out, "status: {verdict} (exit {})", status.code());
    out
}

/// `solve`: verify the tube, iterate, write `solution.csv` and
/// `report.txt`, print the report.
pub fn run_solve(config: &Config, out_dir: &Path, stdout: &mut String) -> CliResult<Status> {
    let solved = solve(config)?;
    let csv = solution_csv(&solved)?;
    let report = solve_report_text(config, &solved);
    write_file(out_dir, "solution.csv", &csv)?;
    write_file(out_dir, "report.txt", &report)?;
    stdout.push_str(&report);
    Ok(solve_status(&solved.report))
}

pub fn tube_csv(report: &TubeReport) -> String {
    let mut out = String::from(TubeReport::CSV_HEADER);
    out.push('\n');
    for row in report.csv_rows() {
        out.push_str(&row);
        out.push('\n');
    }
    out
}

/// `verify-tube`: check the tube conditions only.
pub fn run_verify(
    config: &Config,
    out_dir: Option<&Path>,
    stdout: &mut String,
) -> CliResult<Status> {
    let problem = config.base_problem()?;
    let tube = config.tube(&problem)?;
    let report = verify_tube(&tube, &problem, None)?;
    describe_problem(stdout, config, &problem);
    stdout.push('\n');
    stdout.push_str(&report.to_string());
    if let Some(dir) = out_dir {
        write_file(dir, "tube_report.csv", &tube_csv(&report))?;
    }
    Ok(if report.valid {
        Status::Ok
    } else {
        Status::TubeRejected
    })
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub lambda: f64,
    pub alpha: f64,
    pub report: SolveReport,
}

/// Read `THERMISTOR_THREADS`; unset means rayon's default.
pub fn threads_from_env() -> CliResult<Option<usize>> {
    match std::env::var("THERMISTOR_THREADS") {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(CliError::Config(format!(
                "THERMISTOR_THREADS must be a positive integer, got `{s}`"
            ))),
        },
    }
}

/// Solve every `(lambda, alpha)` tuple, lambda-major in declaration order.
/// Tuples run in parallel; rows come back in tuple order.
pub fn sweep(config: &Config, threads: Option<usize>) -> CliResult<Vec<SweepRow>> {
    let (lambdas, alphas) = config.sweep_lists()?;
    let tuples: Vec<(f64, f64)> = lambdas
        .iter()
        .flat_map(|&l| alphas.iter().map(move |&a| (l, a)))
        .collect();

    let run = || -> Vec<CliResult<SweepRow>> {
        tuples
            .par_iter()
            .map(|&(lambda, alpha)| {
                config
                    .problem(lambda, alpha)
                    .and_then(|p| solve_problem(config, p))
                    .map(|s| SweepRow {
                        lambda,
                        alpha,
                        report: s.report,
                    })
                    .map_err(|e| CliError::Tuple {
                        lambda,
                        alpha,
                        source: Box::new(e),
                    })
            })
            .collect()
    };
    let results = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(format!("cannot start {n} worker threads: {e}")))?
            .install(run),
        None => run(),
    };
    results.into_iter().collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for row in rows {
        let r = &row.report;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            row.lambda, row.alpha, r.converged, r.iterations, r.ode_residual, r.member_of_tube
        );
    }
    out
}

/// `sweep`: the exit status is the worst over all tuples.
pub fn run_sweep(
    config: &Config,
    out_dir: &Path,
    threads: Option<usize>,
    stdout: &mut String,
) -> CliResult<Status> {
    let rows = sweep(config, threads)?;
    let csv = sweep_csv(&rows);
    write_file(out_dir, "sweep.csv", &csv)?;
    stdout.push_str(&csv);
    let status = rows
        .iter()
        .map(|r| solve_status(&r.report))
        .max()
        .unwrap_or(Status::Ok);
    let converged = rows.iter().filter(|r| r.report.converged).count();
    let members = rows.iter().filter(|r| r.report.member_of_tube).count();
    let _ = writeln!(
        stdout,
        "{} tuples, {converged} converged, {members} inside their tube (exit {})",
        rows.len(),
        status.code()
    );
    Ok(status)
}
