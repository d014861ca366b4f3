//! Uniform grids on `[a, T]` and real-valued samples on them.

use std::sync::Arc;

use crate::error::{Error, Result};

/// Uniform discretisation of `[a, T]` with `a > 0` and at least three nodes.
///
/// The first node is exactly `a` and the last is exactly `T`; interior nodes
/// are `a + i h` with `h = (T - a) / (n - 1)`.
#[derive(Debug, Clone)]
pub struct Grid {
    a: f64,
    end: f64,
    h: f64,
    nodes: Arc<[f64]>,
}

impl Grid {
    pub fn new(a: f64, end: f64, n: usize) -> Result<Self> {
        if !a.is_finite() || !end.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "endpoints must be finite, got [{a}, {end}]"
            )));
        }
        if a <= 0.0 {
            return Err(Error::InvalidGrid(format!(
                "left endpoint must be positive, got a = {a}"
            )));
        }
        if end <= a {
            return Err(Error::InvalidGrid(format!(
                "right endpoint must exceed a, got [{a}, {end}]"
            )));
        }
        if n < 3 {
            return Err(Error::InvalidGrid(format!(
                "second-order stencils need at least 3 nodes, got {n}"
            )));
        }
        let h = (end - a) / (n - 1) as f64;
        let nodes: Arc<[f64]> = (0..n)
            .map(|i| if i == n - 1 { end } else { a + i as f64 * h })
            .collect();
        Ok(Self { a, end, h, nodes })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    /// Node spacing.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> f64 {
        self.nodes[i]
    }

    /// Index of the node equal to `t`, accepting a rounding-level offset.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        if !t.is_finite() {
            return Err(Error::OffGrid { t });
        }
        let pos = (t - self.a) / self.h;
        let i = pos.round();
        if i < 0.0 || i > (self.len() - 1) as f64 {
            return Err(Error::OffGrid { t });
        }
        let i = i as usize;
        let scale = self.end.abs().max(self.a.abs());
        if (self.nodes[i] - t).abs() <= 64.0 * f64::EPSILON * scale {
            Ok(i)
        } else {
            Err(Error::OffGrid { t })
        }
    }

    /// Composite trapezoidal weights over the whole grid.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let n = self.len();
        let mut w = vec![0.0; n];
        for i in 0..n - 1 {
            let dt = self.nodes[i + 1] - self.nodes[i];
            w[i] += 0.5 * dt;
            w[i + 1] += 0.5 * dt;
        }
        w
    }

    /// Samples `f` at every node.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Result<GridFunction> {
        GridFunction::new(self.clone(), self.nodes.iter().map(|&t| f(t)).collect())
    }

    pub fn constant(&self, c: f64) -> Result<GridFunction> {
        GridFunction::new(self.clone(), vec![c; self.len()])
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.nodes, &other.nodes)
            || (self.a == other.a && self.end == other.end && self.len() == other.len())
    }
}

/// Finite samples of a function on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "grid function value",
                index,
            });
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn first(&self) -> f64 {
        self.values[0]
    }

    pub fn last(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn ensure_same_grid(&self, other: &GridFunction) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Node-wise map; the result must stay finite.
    pub fn map(&self, f: impl Fn(f64, f64) -> f64) -> Result<GridFunction> {
        let values = self
            .grid
            .nodes()
            .iter()
            .zip(&self.values)
            .map(|(&t, &v)| f(t, v))
            .collect();
        GridFunction::new(self.grid.clone(), values)
    }

    /// Node-wise combination of two functions on the same grid.
    pub fn zip_with(
        &self,
        other: &GridFunction,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<GridFunction> {
        self.ensure_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&x, &y)| f(x, y))
            .collect();
        GridFunction::new(self.grid.clone(), values)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `sup_i |self_i - other_i|`.
    pub fn sup_distance(&self, other: &GridFunction) -> Result<f64> {
        self.ensure_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (x, y)| m.max((x - y).abs())))
    }
}
