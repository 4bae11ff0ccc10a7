//! Grid-sampled scalar, vector and tensor fields and time series of them.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::grid::Grid;
use crate::error::{LabError, Result};

/// Values at every node; `components` is 1 (scalar), n (vector) or n*n (tensor,
/// row-major `F_ij`). Storage is node-major, so node `p` occupies
/// `values[p * components .. (p + 1) * components]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    pub grid: Grid,
    pub components: usize,
    pub values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, components: usize, values: Vec<f64>) -> Result<Self> {
        let n = grid.n;
        if components != 1 && components != n && components != n * n {
            return Err(LabError::InvalidArgument(format!("{components} components on an n = {n} grid")));
        }
        if values.len() != grid.len() * components {
            return Err(LabError::ComponentMismatch {
                expected: grid.len() * components,
                found: values.len(),
            });
        }
        if let Some(p) = values.iter().position(|v| !v.is_finite()) {
            return Err(LabError::NonFinite(format!("field entry {p}")));
        }
        Ok(Field { grid, components, values })
    }

    pub fn zeros(grid: &Grid, components: usize) -> Self {
        Field { grid: grid.clone(), components, values: vec![0.0; grid.len() * components] }
    }

    pub fn scalar_from_fn<F: FnMut(&[f64]) -> f64>(grid: &Grid, mut f: F) -> Self {
        let values = (0..grid.len()).map(|p| f(&grid.position(p))).collect();
        Field { grid: grid.clone(), components: 1, values }
    }

    /// Builds a field with `components` entries per node from `f(x, out)`.
    pub fn from_fn<F: FnMut(&[f64], &mut [f64])>(grid: &Grid, components: usize, mut f: F) -> Self {
        let mut values = vec![0.0; grid.len() * components];
        for p in 0..grid.len() {
            f(&grid.position(p), &mut values[p * components..(p + 1) * components]);
        }
        Field { grid: grid.clone(), components, values }
    }

    pub fn from_components(grid: &Grid, comps: &[Vec<f64>]) -> Result<Self> {
        let c = comps.len();
        let len = grid.len();
        if comps.iter().any(|v| v.len() != len) {
            return Err(LabError::ComponentMismatch { expected: len, found: comps[0].len() });
        }
        let mut values = vec![0.0; len * c];
        for (k, v) in comps.iter().enumerate() {
            for p in 0..len {
                values[p * c + k] = v[p];
            }
        }
        Field::new(grid.clone(), c, values)
    }

    pub fn component(&self, c: usize) -> Vec<f64> {
        (0..self.grid.len()).map(|p| self.values[p * self.components + c]).collect()
    }

    pub fn get(&self, node: usize, c: usize) -> f64 {
        self.values[node * self.components + c]
    }

    pub fn set(&mut self, node: usize, c: usize, v: f64) {
        self.values[node * self.components + c] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, s: f64) -> Field {
        Field { grid: self.grid.clone(), components: self.components, values: self.values.iter().map(|v| v * s).collect() }
    }

    pub fn axpy(&self, a: f64, other: &Field) -> Result<Field> {
        self.grid.require_same(&other.grid)?;
        if self.components != other.components {
            return Err(LabError::ComponentMismatch { expected: self.components, found: other.components });
        }
        let values = self.values.iter().zip(&other.values).map(|(x, y)| x + a * y).collect();
        Ok(Field { grid: self.grid.clone(), components: self.components, values })
    }

    pub fn max_abs_diff(&self, other: &Field) -> f64 {
        self.values.iter().zip(&other.values).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Ellipticity constants of a coefficient tensor field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientAudit {
    pub lambda_min: f64,
    #[serde(rename = "Lambda_max")]
    pub lambda_max: f64,
}

impl CoefficientAudit {
    /// `lambda_min` is the smallest eigenvalue of the symmetric part over all
    /// nodes; `Lambda_max` the largest |a_ij|.
    pub fn of(a: &Field) -> Result<Self> {
        let n = a.grid.n;
        if a.components != n * n {
            return Err(LabError::ComponentMismatch { expected: n * n, found: a.components });
        }
        let mut lmin = f64::INFINITY;
        let mut lmax: f64 = 0.0;
        for p in 0..a.grid.len() {
            let m = DMatrix::from_fn(n, n, |i, j| 0.5 * (a.get(p, i * n + j) + a.get(p, j * n + i)));
            let ev = m.symmetric_eigenvalues();
            lmin = lmin.min(ev.iter().cloned().fold(f64::INFINITY, f64::min));
            for c in 0..n * n {
                lmax = lmax.max(a.get(p, c).abs());
            }
        }
        Ok(CoefficientAudit { lambda_min: lmin, lambda_max: lmax })
    }

    pub fn is_elliptic(&self) -> bool {
        self.lambda_min > 0.0 && self.lambda_min <= self.lambda_max
    }
}

pub fn identity_coefficients(grid: &Grid) -> Field {
    let n = grid.n;
    Field::from_fn(grid, n * n, |_, out| {
        for i in 0..n {
            out[i * n + i] = 1.0;
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Uniform,
    Chebyshev,
    Graded,
}

/// Snapshots of fields at increasing time nodes.
#[derive(Clone, Debug)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub snapshots: Vec<Field>,
    pub kind: NodeKind,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>, snapshots: Vec<Field>, kind: NodeKind) -> Result<Self> {
        if times.len() != snapshots.len() || times.is_empty() {
            return Err(LabError::InvalidArgument("time series needs one snapshot per time".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(LabError::InvalidArgument("time nodes must increase".into()));
        }
        for s in &snapshots[1..] {
            snapshots[0].grid.require_same(&s.grid)?;
        }
        Ok(TimeSeries { times, snapshots, kind })
    }

    pub fn grid(&self) -> &Grid {
        &self.snapshots[0].grid
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Snapshot closest to `t`.
    pub fn nearest(&self, t: f64) -> &Field {
        let mut best = 0;
        for (i, &s) in self.times.iter().enumerate() {
            if (s - t).abs() < (self.times[best] - t).abs() {
                best = i;
            }
        }
        &self.snapshots[best]
    }

    pub fn map<F: Fn(&Field) -> Field>(&self, f: F) -> TimeSeries {
        TimeSeries { times: self.times.clone(), snapshots: self.snapshots.iter().map(f).collect(), kind: self.kind }
    }
}
