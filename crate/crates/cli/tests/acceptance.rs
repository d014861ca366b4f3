//! Acceptance suite. Runs as a plain binary (`harness = false`) and prints one
//! line per criterion; exits nonzero if any criterion fails.
//!
//! ```text
//! cargo test -p thermistor-cli --test acceptance
//! ```

// `ensure!` negates its condition so that a NaN measurement fails.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config as RunnerConfig, TestRunner};

use thermistor_core::conformable::{conformable_derivative, cumulative_conformable_integral};
use thermistor_core::expr::{eval_expr, parse_expr};
use thermistor_core::model::{evaluate_g, Scaled, Source};
use thermistor_core::tube::{membership, truncate, verify_tube};
use thermistor_core::{
    apply_k, linear_residual, oracle_solve, picard_solve, solve_linear, Alpha, Error, Grid,
    GridFunction, SolveOptions, ThermistorProblem, Tube,
};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Option<Duration>,
    run: fn() -> Outcome,
}

const LADDER: [usize; 3] = [101, 201, 401];
const MIN_ORDER: f64 = 1.8;

fn orders(errs: &[f64]) -> Vec<f64> {
    errs.windows(2)
        .zip(LADDER.windows(2))
        .map(|(e, n)| (e[1] / e[0]).ln() / ((n[0] - 1) as f64 / (n[1] - 1) as f64).ln())
        .collect()
}

fn problem(f: &str, a: f64, end: f64, lambda: f64, alpha: f64, u_a: f64) -> ThermistorProblem {
    ThermistorProblem::new(
        a,
        end,
        lambda,
        Alpha::new(alpha).unwrap(),
        u_a,
        Arc::new(parse_expr(f).unwrap()),
    )
    .unwrap()
}

fn opts(n: usize) -> SolveOptions {
    SolveOptions {
        grid_n: n,
        tol_fp: 1e-10,
        ..SolveOptions::default()
    }
}

fn identity_suite() -> Outcome {
    let mut worst = f64::INFINITY;
    for alpha in [0.3, 0.5, 0.7] {
        let a = Alpha::new(alpha).unwrap();
        let errs: Vec<f64> = LADDER
            .iter()
            .map(|&n| {
                let grid = Grid::new(1.0, 4.0, n).unwrap();
                let f = grid.sample(f64::sin).unwrap();
                let back =
                    conformable_derivative(&cumulative_conformable_integral(&f, a).unwrap(), a)
                        .unwrap();
                back.sup_distance(&f).unwrap()
            })
            .collect();
        for p in orders(&errs) {
            ensure!(
                p >= MIN_ORDER,
                "alpha {alpha}: roundtrip order {p:.3} from {errs:?}"
            );
            worst = worst.min(p);
        }
    }
    let mut worst_const: f64 = 0.0;
    for alpha in [0.05, 0.3, 0.5, 0.7, 1.0] {
        for n in LADDER {
            let grid = Grid::new(1.0, 4.0, n).unwrap();
            let err =
                conformable_derivative(&grid.constant(2.5).unwrap(), Alpha::new(alpha).unwrap())
                    .unwrap()
                    .sup_norm();
            ensure!(
                err <= 1e-12,
                "constant rule error {err:e} at alpha {alpha}, n {n}"
            );
            worst_const = worst_const.max(err);
        }
    }
    Ok(format!(
        "min order {worst:.3}, max constant error {worst_const:e}"
    ))
}

fn linear_closed_form() -> Outcome {
    let alpha = Alpha::new(0.7).unwrap();
    let errs: Vec<f64> = LADDER
        .iter()
        .map(|&n| {
            let grid = Grid::new(1.0, 2.0, n).unwrap();
            let g = grid.sample(f64::sin).unwrap();
            linear_residual(&solve_linear(&g, 1.0, alpha).unwrap(), &g, alpha).unwrap()
        })
        .collect();
    let ps = orders(&errs);
    for &p in &ps {
        ensure!(p >= MIN_ORDER, "residual order {p:.3} from {errs:?}");
    }

    // x ≡ c solves x^(α) + x / a^α = c / a^α; a = 1.5 so a^α is not 1.
    let (a, c) = (1.5, 3.0);
    let grid = Grid::new(a, 2.0, 101).unwrap();
    let g = grid.constant(c / a.powf(0.7)).unwrap();
    let r = linear_residual(&solve_linear(&g, c, alpha).unwrap(), &g, alpha).unwrap();
    ensure!(r <= 1e-10, "constant solution residual {r:e}");
    Ok(format!(
        "orders {:.3}, {:.3}; constant residual {r:e}",
        ps[0], ps[1]
    ))
}

fn constant_source() -> Outcome {
    let p = problem("1", 1.0, 2.0, 1.0, 0.5, 0.0);
    let o = opts(4001);
    let exact = |t: f64| 2.0 * (t.sqrt() - 1.0);

    let oracle = oracle_solve(&p, &o).map_err(|e| e.to_string())?;
    let oracle_gap = (oracle.u.last() - exact(2.0)).abs();
    ensure!(
        oracle_gap <= 1e-8,
        "RK4 oracle misses the closed form by {oracle_gap:e}"
    );

    let grid = p.grid(o.grid_n).unwrap();
    let tube = Tube::new(grid.sample(exact).unwrap(), grid.constant(0.5).unwrap()).unwrap();
    let r = picard_solve(&p, &tube, &o).map_err(|e| e.to_string())?;
    ensure!(r.converged, "not converged");
    ensure!(r.iterations <= 3, "{} iterations", r.iterations);
    let err = (r.u.last() - 0.828427).abs();
    ensure!(
        err <= 1e-6,
        "u(2) = {} is {err:e} from 0.828427",
        r.u.last()
    );
    Ok(format!(
        "{} iteration(s), u(2) = {}, oracle gap {oracle_gap:e}",
        r.iterations,
        r.u.last()
    ))
}

fn oracle_equivalence() -> Outcome {
    let p = problem("2 + sin(u)", 1.0, 2.0, 1.0, 0.7, 0.1);
    let o = opts(4001);
    let oracle = oracle_solve(&p, &o).map_err(|e| e.to_string())?;
    ensure!(oracle.converged, "oracle outer loop did not converge");
    let grid = oracle.u.grid().clone();
    let tube = Tube::new(oracle.u.clone(), grid.constant(1.0).unwrap()).unwrap();
    let r = picard_solve(&p, &tube, &o).map_err(|e| e.to_string())?;
    ensure!(r.converged, "Picard did not converge: {:?}", r.fp_residuals);
    let gap = r.u.sup_distance(&oracle.u).unwrap();
    ensure!(gap <= 1e-5, "sup gap {gap:e}");
    Ok(format!("sup gap {gap:e} after {} iterations", r.iterations))
}

type Profile = fn(f64) -> f64;

fn containment() -> Outcome {
    let p1 = problem("1", 1.0, 2.0, 1.0, 0.5, 0.0);
    let p2 = problem("2 + sin(u)", 1.0, 2.0, 1.0, 0.7, 0.1);
    let p3 = problem("1 + 0.5*cos(t*u)", 0.5, 1.5, 2.0, 0.3, -0.2);
    let corpus: Vec<(&ThermistorProblem, Profile, Profile)> = vec![
        (&p1, |t| 2.0 * (t.sqrt() - 1.0), |_| 0.5),
        (&p1, |t| 2.0 * (t.sqrt() - 1.0), |_| 0.0),
        (&p1, |_| 0.0, |t| 0.5 + 2.0 * (t - 1.0)),
        (&p1, |_| 0.0, |_| 0.5),
        (&p2, |_| 0.1, |t| 0.5 + 2.0 * (t - 1.0)),
        (&p2, |t| 0.1 + 0.4 * (t - 1.0), |t| 0.2 + (t - 1.0)),
        (&p2, |_| 0.1, |_| 0.05),
        (&p3, |_| -0.2, |t| 1.0 + 5.0 * (t - 0.5)),
        (&p3, |t| -0.2 + 1.5 * (t - 0.5), |t| 0.3 + 4.0 * (t - 0.5)),
    ];
    let o = opts(801);
    let mut verified = 0;
    let mut worst: f64 = f64::NEG_INFINITY;
    for (k, (p, v, m)) in corpus.iter().enumerate() {
        let grid = p.grid(o.grid_n).unwrap();
        let tube = Tube::new(grid.sample(v).unwrap(), grid.sample(m).unwrap()).unwrap();
        let report = verify_tube(&tube, p, None).map_err(|e| e.to_string())?;
        if !report.valid {
            continue;
        }
        verified += 1;
        let r = picard_solve(p, &tube, &o).map_err(|e| e.to_string())?;
        ensure!(r.converged, "tube {k}: not converged");
        let slack = 10.0 * grid.h() * grid.h();
        ensure!(
            membership(&r.u, &tube, slack).unwrap(),
            "tube {k}: solution leaves the tube"
        );
        for i in 0..grid.len() {
            let excess = (r.u.value(i) - tube.center().value(i)).abs() - tube.radius().value(i);
            worst = worst.max(excess);
        }
    }
    ensure!(verified >= 5, "only {verified} tubes passed verification");
    Ok(format!(
        "{verified} of {} tubes verified, all contain their solution (worst excess {worst:e})",
        corpus.len()
    ))
}

const N: usize = 32;

fn gf(v: Vec<f64>) -> GridFunction {
    GridFunction::new(Grid::new(1.0, 2.0, N).unwrap(), v).unwrap()
}

fn runner(cases: u32) -> TestRunner {
    TestRunner::new_with_rng(
        RunnerConfig {
            cases,
            failure_persistence: None,
            ..RunnerConfig::default()
        },
        proptest::test_runner::TestRng::deterministic_rng(
            proptest::test_runner::RngAlgorithm::ChaCha,
        ),
    )
}

fn truncation_algebra() -> Outcome {
    let cases = 256;
    let tube = (
        prop::collection::vec(-2.0f64..2.0, N),
        prop::collection::vec(prop_oneof![Just(0.0), 0.0f64..1.5], N),
    );
    let strategy = (
        tube,
        prop::collection::vec(-6.0f64..6.0, N),
        -2.0f64..2.0,
        0.1f64..=1.0,
    );
    let mut r = runner(cases);
    r.run(&strategy, |((v, m), u, u_a, alpha)| {
        let tube = Tube::new(gf(v), gf(m)).unwrap();
        let u = gf(u);
        let t1 = truncate(&u, &tube).unwrap();
        let t2 = truncate(&t1, &tube).unwrap();
        prop_assert!(t1
            .values()
            .iter()
            .zip(t2.values())
            .all(|(a, b)| a.to_bits() == b.to_bits()));
        for i in 0..N {
            let (c, rad) = (tube.center().value(i), tube.radius().value(i));
            let d = (t1.value(i) - c).abs();
            let bound = (u.value(i) - c).abs().min(rad);
            prop_assert!(
                d <= bound + 4.0 * f64::EPSILON * c.abs().max(1.0),
                "node {}",
                i
            );
            prop_assert!(d <= rad);
        }
        let p = ThermistorProblem::new(
            1.0,
            2.0,
            1.0,
            Alpha::new(alpha).unwrap(),
            u_a,
            Arc::new(parse_expr("2 + sin(u) + 0.5*cos(t*u)").unwrap()),
        )
        .unwrap();
        let ku = apply_k(&u, &tube, &p).unwrap();
        let kt = apply_k(&t1, &tube, &p).unwrap();
        prop_assert!(ku
            .values()
            .iter()
            .zip(kt.values())
            .all(|(a, b)| a.to_bits() == b.to_bits()));
        prop_assert_eq!(ku.first().to_bits(), u_a.to_bits());
        Ok(())
    })
    .map_err(|e| e.to_string())?;
    Ok(format!("{cases} random grid functions and tubes"))
}

fn g_homogeneity() -> Outcome {
    let cases = 256;
    let strategy = (
        prop::collection::vec(0.0f64..2.0, 3),
        prop::collection::vec(-3.0f64..3.0, N),
        0.01f64..100.0,
        0.1f64..5.0,
    );
    let mut r = runner(cases);
    r.run(&strategy, |(coef, u, c, lambda)| {
        let src = format!(
            "0.1 + {} * (1 + cos(t*u)) + {} * exp(-t) + {} * u^2",
            coef[0], coef[1], coef[2]
        );
        let f: Arc<dyn Source> = Arc::new(parse_expr(&src).unwrap());
        let p = ThermistorProblem::new(1.0, 2.0, lambda, Alpha::new(0.6).unwrap(), 0.0, f.clone())
            .unwrap();
        let scaled = p.with_source(Arc::new(Scaled {
            factor: c,
            inner: f,
        }));
        let u = gf(u);
        let g = evaluate_g(&p, &u).unwrap();
        let gc = evaluate_g(&scaled, &u).unwrap();
        for (x, y) in g.values().iter().zip(gc.values()) {
            prop_assert!(*x > 0.0 && *y > 0.0);
            prop_assert!((y - x / c).abs() <= 1e-12 * (x / c), "{} vs {}", y, x / c);
        }
        Ok(())
    })
    .map_err(|e| e.to_string())?;

    // f = 1.5 - t reaches zero at t = 1.5, node 5 of an 11-node grid on [1, 2].
    let p = problem("1.5 - t", 1.0, 2.0, 1.0, 0.5, 0.0);
    let u = p.grid(11).unwrap().constant(0.0).unwrap();
    match evaluate_g(&p, &u) {
        Err(e @ Error::H1Violated { index: 5, .. }) => {
            ensure!(
                e.to_string().contains("node 5"),
                "message does not name the node: {e}"
            );
            Ok(format!("{cases} random sources; crossing detected: {e}"))
        }
        other => Err(format!("expected H1 violation at node 5, got {other:?}")),
    }
}

const CORPUS: &[(&str, f64, f64, f64)] = &[
    ("1+2*3", 0.0, 0.0, 7.0),
    ("2^3^2", 0.0, 0.0, 512.0),
    ("(1+2)*3", 0.0, 0.0, 9.0),
    ("10-4-3", 0.0, 0.0, 3.0),
    ("64/4/2", 0.0, 0.0, 8.0),
    ("2*3^2", 0.0, 0.0, 18.0),
    ("-2^2", 0.0, 0.0, -4.0),
    ("(-2)^2", 0.0, 0.0, 4.0),
    ("2^-1", 0.0, 0.0, 0.5),
    ("--3", 0.0, 0.0, 3.0),
    ("-3*-2", 0.0, 0.0, 6.0),
    ("1-2*3+4", 0.0, 0.0, -1.0),
    ("8/2*4", 0.0, 0.0, 16.0),
    ("t*u+t", 2.0, 3.0, 8.0),
    ("t^2-u^2", 3.0, 2.0, 5.0),
    ("abs(u)+sqrt(t)", 4.0, -2.0, 4.0),
    ("cos(0)*2^t", 3.0, 0.0, 8.0),
    ("2+sin(u)*exp(-t)", 1.0, 0.0, 2.0),
    ("1.5e1/3", 0.0, 0.0, 5.0),
    ("2^(1+1)^2", 0.0, 0.0, 16.0),
    ("-u^2", 0.0, 3.0, -9.0),
    ("t-(u-t)", 1.0, 5.0, -3.0),
];

const MALFORMED: &[(&str, usize)] = &[
    ("", 0),
    ("1+", 2),
    ("(1+2", 4),
    ("1+2)", 3),
    ("2t", 1),
    ("x+1", 0),
    ("foo(1)", 0),
    ("1 ** 2", 3),
    ("sin()", 4),
    ("1 $ 2", 2),
];

fn parser() -> Outcome {
    for &(src, t, u, expected) in CORPUS {
        let e = parse_expr(src).map_err(|e| format!("{src}: {e}"))?;
        let got = eval_expr(&e, t, u).map_err(|e| format!("{src}: {e}"))?;
        ensure!(
            (got - expected).abs() <= 1e-12,
            "{src} gave {got}, expected {expected}"
        );
    }
    for &(src, offset) in MALFORMED {
        match parse_expr(src) {
            Ok(_) => return Err(format!("`{src}` parsed")),
            Err(e) => ensure!(
                e.offset == offset,
                "`{src}`: error at {} not {offset}: {e}",
                e.offset
            ),
        }
    }
    let cases = 512;
    let mut r = runner(cases);
    r.run(&"[ -~]{0,40}", |src| {
        let outcome = panic::catch_unwind(|| match parse_expr(&src) {
            Ok(e) => {
                let _ = eval_expr(&e, 1.0, 1.0);
                true
            }
            Err(e) => e.offset <= src.len(),
        });
        prop_assert!(matches!(outcome, Ok(true)), "`{}`", src);
        Ok(())
    })
    .map_err(|e| e.to_string())?;
    Ok(format!(
        "{} precedence cases, {} malformed inputs, {cases} random strings",
        CORPUS.len(),
        MALFORMED.len()
    ))
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(format!("{name}.conf"))
}

fn thermistor(args: &[&str], out: &Path, threads: Option<&str>) -> Result<i32, String> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_thermistor"));
    cmd.args(args).arg("--out").arg(out);
    match threads {
        Some(n) => cmd.env("THERMISTOR_THREADS", n),
        None => cmd.env_remove("THERMISTOR_THREADS"),
    };
    let o = cmd.output().map_err(|e| e.to_string())?;
    o.status
        .code()
        .ok_or_else(|| "killed by a signal".to_string())
}

fn cli_determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let sweep = scenario("sweep");
    let sweep = sweep.to_str().unwrap();
    let mut outputs = Vec::new();
    for (k, threads) in [Some("1"), None].into_iter().enumerate() {
        let dir = tmp.path().join(format!("sweep{k}"));
        let code = thermistor(&["sweep", "--config", sweep], &dir, threads)?;
        ensure!(code == 0, "sweep run {k} exited {code}");
        outputs.push(fs::read(dir.join("sweep.csv")).map_err(|e| e.to_string())?);
    }
    ensure!(outputs[0] == outputs[1], "sweep.csv differs between runs");
    let rows = outputs[0].iter().filter(|&&b| b == b'\n').count() - 1;
    ensure!(rows == 6, "sweep.csv has {rows} rows");

    let mut codes = Vec::new();
    for (name, expected) in [
        ("converged", 0),
        ("not_converged", 2),
        ("invalid_tube", 3),
        ("negative_source", 4),
    ] {
        let config = scenario(name);
        let code = thermistor(
            &["solve", "--config", config.to_str().unwrap()],
            &tmp.path().join(name),
            None,
        )?;
        ensure!(code == expected, "{name}: exit {code}, expected {expected}");
        codes.push(format!("{name}={code}"));
    }
    Ok(format!(
        "sweep.csv identical ({} bytes); exits {}",
        outputs[0].len(),
        codes.join(" ")
    ))
}

const CRITERIA: &[Criterion] = &[
    Criterion {
        id: 1,
        name: "conformable identity suite",
        limit: Some(Duration::from_secs(1)),
        run: identity_suite,
    },
    Criterion {
        id: 2,
        name: "linear closed form",
        limit: Some(Duration::from_secs(1)),
        run: linear_closed_form,
    },
    Criterion {
        id: 3,
        name: "constant-source thermistor instance",
        limit: Some(Duration::from_secs(2)),
        run: constant_source,
    },
    Criterion {
        id: 4,
        name: "oracle equivalence for f = 2 + sin(u)",
        limit: Some(Duration::from_secs(5)),
        run: oracle_equivalence,
    },
    Criterion {
        id: 5,
        name: "verified tubes contain the solution",
        limit: None,
        run: containment,
    },
    Criterion {
        id: 6,
        name: "truncation and operator algebra",
        limit: None,
        run: truncation_algebra,
    },
    Criterion {
        id: 7,
        name: "g homogeneity, positivity and H1 detection",
        limit: None,
        run: g_homogeneity,
    },
    Criterion {
        id: 8,
        name: "expression parser",
        limit: None,
        run: parser,
    },
    Criterion {
        id: 9,
        name: "CLI determinism and exit codes",
        limit: None,
        run: cli_determinism,
    },
];

fn main() -> ExitCode {
    // Libtest flags such as --nocapture may be passed through; they are ignored.
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for c in CRITERIA {
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let result = match (result, c.limit) {
            (Ok(_), Some(limit)) if elapsed > limit => Err(format!(
                "took {:.2}s, limit {:.0}s",
                elapsed.as_secs_f64(),
                limit.as_secs_f64()
            )),
            (r, _) => r,
        };
        let (verdict, detail) = match &result {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!(
            "criterion {}: {verdict} {} [{:.3}s] {detail}",
            c.id,
            c.name,
            elapsed.as_secs_f64()
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        CRITERIA.len() - failed,
        CRITERIA.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
