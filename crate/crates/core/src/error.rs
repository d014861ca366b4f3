use thiserror::Error;

use crate::expr::{EvalError, ParseError};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid order alpha = {0}: must lie in (0, 1]")]
    InvalidAlpha(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid functions live on different grids")]
    GridMismatch,

    #[error("non-finite {what} at node {index}")]
    NonFinite { what: &'static str, index: usize },

    #[error("sign-degenerate input: u = 0 at node {index} (t = {t})")]
    SignDegenerate { index: usize, t: f64 },

    #[error("t = {t} is not a grid node")]
    OffGrid { t: f64 },

    #[error("empty or reversed integration range [{lo}, {hi}]")]
    InvalidRange { lo: f64, hi: f64 },

    #[error("range error: value overflowed at node {index} (t = {t})")]
    Range { index: usize, t: f64 },

    #[error("H1 violated at node {index}: f({t}, {u}) = {value} is not strictly positive")]
    H1Violated {
        index: usize,
        t: f64,
        u: f64,
        value: f64,
    },

    #[error("source evaluation failed at t = {t}, u = {u}: {source}")]
    Source {
        t: f64,
        u: f64,
        #[source]
        source: EvalError,
    },

    #[error("picard iteration {iteration}: {source}")]
    Iteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Parse(#[from] ParseError),
}
