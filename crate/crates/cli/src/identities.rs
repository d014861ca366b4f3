//! Refinement table for the conformable identities and the linear closed
//! form.
//!
//! Per `(alpha, n)`:
//!
//! - `constant_err`: `sup |T_α 1|` on `[1, 4]`.
//! - `roundtrip_err`: `sup |T_α I_α sin - sin|` on `[1, 4]`.
//! - `linear_residual`: residual of the closed-form solve of
//!   `x^(α) + x = sin t`, `x(1) = 1` on `[1, 2]`.
//! - `classical_gap`: `sup |T_α sin - D_h sin|` on `[1, 4]`, where `D_h` is the
//!   plain difference stencil. Exactly zero at `α = 1`.
//!
//! Orders compare each grid size with the previous one for the same `α`.

use std::fmt::Write as _;

use thermistor_core::conformable::{
    classical_derivative, conformable_derivative, cumulative_conformable_integral,
};
use thermistor_core::{linear_residual, solve_linear, Alpha, Grid};

use crate::error::{CliError, CliResult};

pub const DEFAULT_ALPHAS: [f64; 4] = [0.3, 0.5, 0.7, 1.0];
pub const DEFAULT_SIZES: [usize; 3] = [101, 201, 401];
pub const MIN_ORDER: f64 = 1.8;
pub const CONSTANT_TOL: f64 = 1e-12;

pub const HEADER: &str = "alpha,n,h,constant_err,roundtrip_err,roundtrip_order,linear_residual,linear_order,classical_gap";

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityRow {
    pub alpha: f64,
    pub n: usize,
    pub h: f64,
    pub constant_err: f64,
    pub roundtrip_err: f64,
    pub roundtrip_order: Option<f64>,
    pub linear_residual: f64,
    pub linear_order: Option<f64>,
    pub classical_gap: f64,
}

fn order(coarse: (usize, f64), fine: (usize, f64)) -> f64 {
    let ratio = (coarse.0 - 1) as f64 / (fine.0 - 1) as f64;
    (fine.1 / coarse.1).ln() / ratio.ln()
}

fn measure(alpha: Alpha, n: usize) -> CliResult<IdentityRow> {
    let wide = Grid::new(1.0, 4.0, n)?;
    let constant_err = conformable_derivative(&wide.constant(1.0)?, alpha)?.sup_norm();

    let sin = wide.sample(f64::sin)?;
    let roundtrip = conformable_derivative(&cumulative_conformable_integral(&sin, alpha)?, alpha)?;
    let roundtrip_err = roundtrip.sup_distance(&sin)?;

    let plain = classical_derivative(&sin);
    let classical_gap = conformable_derivative(&sin, alpha)?
        .values()
        .iter()
        .zip(&plain)
        .map(|(c, d)| (c - d).abs())
        .fold(0.0, f64::max);

    let narrow = Grid::new(1.0, 2.0, n)?;
    let g = narrow.sample(f64::sin)?;
    let x = solve_linear(&g, 1.0, alpha)?;
    let linear_residual = linear_residual(&x, &g, alpha)?;

    Ok(IdentityRow {
        alpha: alpha.value(),
        n,
        h: wide.h(),
        constant_err,
        roundtrip_err,
        roundtrip_order: None,
        linear_residual,
        linear_order: None,
        classical_gap,
    })
}

pub fn identity_table(alphas: &[f64], sizes: &[usize]) -> CliResult<Vec<IdentityRow>> {
    if alphas.is_empty() || sizes.is_empty() {
        return Err(CliError::Config(
            "identities needs at least one alpha and one grid size".into(),
        ));
    }
    let mut rows = Vec::with_capacity(alphas.len() * sizes.len());
    for &a in alphas {
        let alpha = Alpha::new(a)?;
        let mut prev: Option<IdentityRow> = None;
        for &n in sizes {
            let mut row = measure(alpha, n)?;
            if let Some(p) = &prev {
                row.roundtrip_order = Some(order((p.n, p.roundtrip_err), (n, row.roundtrip_err)));
                row.linear_order = Some(order((p.n, p.linear_residual), (n, row.linear_residual)));
            }
            prev = Some(row.clone());
            rows.push(row);
        }
    }
    Ok(rows)
}

/// All orders at least [`MIN_ORDER`] and every constant error within
/// [`CONSTANT_TOL`]. A NaN order fails.
pub fn passes(rows: &[IdentityRow]) -> bool {
    let order_ok = |o: Option<f64>| o.is_none_or(|o| o >= MIN_ORDER);
    rows.iter().all(|r| {
        r.constant_err <= CONSTANT_TOL && order_ok(r.roundtrip_order) && order_ok(r.linear_order)
    })
}

pub fn to_csv(rows: &[IdentityRow]) -> String {
    let opt = |o: Option<f64>| o.map(|o| o.to_string()).unwrap_or_default();
    let mut out = String::from(HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.alpha,
            r.n,
            r.h,
            r.constant_err,
            r.roundtrip_err,
            opt(r.roundtrip_order),
            r.linear_residual,
            opt(r.linear_order),
            r.classical_gap
        );
    }
    out
}
