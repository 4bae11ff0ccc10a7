//! Flux-form discretisation of `d_i(a_ij d_j u) + d_i f_i`.

use rayon::prelude::*;

use super::field::Field;
use super::grid::Grid;
use crate::error::{LabError, Result};

/// Sparse stencil of the operator `u -> d_i(a_ij d_j u)` on nodes whose full
/// stencil lies inside the box. Coefficients are averaged to half nodes.
#[derive(Clone, Debug)]
pub struct DivergenceOperator {
    pub grid: Grid,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    interior: Vec<bool>,
}

fn interior_along(grid: &Grid, m: &[usize], a: usize) -> bool {
    grid.periodic[a] || (m[a] >= 1 && m[a] + 2 <= grid.shape[a])
}

impl DivergenceOperator {
    pub fn new(a: &Field) -> Result<Self> {
        let grid = a.grid.clone();
        let n = grid.n;
        if a.components != n * n {
            return Err(LabError::ComponentMismatch { expected: n * n, found: a.components });
        }
        let h = grid.h;
        let len = grid.len();
        let mut row_start = Vec::with_capacity(len + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut interior = vec![false; len];
        let mut acc: Vec<(usize, f64)> = Vec::with_capacity(32);
        for p in 0..len {
            row_start.push(cols.len());
            let m = grid.multi(p);
            if !(0..n).all(|ax| interior_along(&grid, &m, ax)) {
                continue;
            }
            interior[p] = true;
            acc.clear();
            for i in 0..n {
                for (sign, lo) in [(1.0, p), (-1.0, grid.neighbor(p, i, -1).unwrap())] {
                    // flux between lo and lo + e_i, entering with `sign / h`
                    let hi = grid.neighbor(lo, i, 1).unwrap();
                    let w = sign / h;
                    let aii = 0.5 * (a.get(lo, i * n + i) + a.get(hi, i * n + i));
                    acc.push((hi, w * aii / h));
                    acc.push((lo, -w * aii / h));
                    for j in 0..n {
                        if j == i {
                            continue;
                        }
                        let aij = 0.5 * (a.get(lo, i * n + j) + a.get(hi, i * n + j));
                        if aij == 0.0 {
                            continue;
                        }
                        let c = w * aij / (4.0 * h);
                        for node in [lo, hi] {
                            acc.push((grid.neighbor(node, j, 1).unwrap(), c));
                            acc.push((grid.neighbor(node, j, -1).unwrap(), -c));
                        }
                    }
                }
            }
            // merge in order of first appearance so every row sums its terms
            // in the same pattern; the diagonal is implied by the zero row sum
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(acc.len());
            for &(col, v) in &acc {
                match merged.iter_mut().find(|e| e.0 == col) {
                    Some(e) => e.1 += v,
                    None => merged.push((col, v)),
                }
            }
            for (col, v) in merged {
                if col != p {
                    cols.push(col);
                    vals.push(v);
                }
            }
        }
        row_start.push(cols.len());
        Ok(DivergenceOperator { grid, row_start, cols, vals, interior })
    }

    pub fn is_interior(&self, p: usize) -> bool {
        self.interior[p]
    }

    pub fn interior_mask(&self) -> &[bool] {
        &self.interior
    }

    /// `d_i(a_ij d_j u)` at interior nodes; zero elsewhere.
    pub fn apply_interior(&self, u: &[f64], out: &mut [f64]) {
        let row = |p: usize| -> f64 {
            let (s, e) = (self.row_start[p], self.row_start[p + 1]);
            let up = u[p];
            let mut v = 0.0;
            for k in s..e {
                v += self.vals[k] * (u[self.cols[k]] - up);
            }
            v
        };
        if out.len() > 20_000 {
            out.par_iter_mut().enumerate().for_each(|(p, o)| *o = row(p));
        } else {
            for (p, o) in out.iter_mut().enumerate() {
                *o = row(p);
            }
        }
    }

    /// `d_i f_i` at interior nodes (centred, equal to the half-node flux difference).
    pub fn divergence_interior(&self, f: &Field, out: &mut [f64]) {
        let n = self.grid.n;
        let h = self.grid.h;
        for (p, o) in out.iter_mut().enumerate() {
            if !self.interior[p] {
                *o = 0.0;
                continue;
            }
            let mut v = 0.0;
            for i in 0..n {
                let up = self.grid.neighbor(p, i, 1).unwrap();
                let dn = self.grid.neighbor(p, i, -1).unwrap();
                v += (f.get(up, i) - f.get(dn, i)) / (2.0 * h);
            }
            *o = v;
        }
    }

    /// Fills non-interior nodes by one-sided quadratic extrapolation along the
    /// inward normal, axis by axis.
    pub fn extrapolate_boundary(&self, out: &mut [f64]) {
        let g = &self.grid;
        let n = g.n;
        for a in 0..n {
            if g.periodic[a] {
                continue;
            }
            for p in 0..g.len() {
                let m = g.multi(p);
                let at_face = m[a] == 0 || m[a] + 1 == g.shape[a];
                if !at_face || !((a + 1)..n).all(|b| interior_along(g, &m, b)) {
                    continue;
                }
                let dir: isize = if m[a] == 0 { 1 } else { -1 };
                let q1 = g.neighbor(p, a, dir).unwrap();
                let q2 = g.neighbor(p, a, 2 * dir).unwrap();
                let q3 = g.neighbor(p, a, 3 * dir).unwrap();
                out[p] = 3.0 * out[q1] - 3.0 * out[q2] + out[q3];
            }
        }
    }
}

/// Discrete `d_i(a_ij d_j u) + d_i f_i` on a whole-space grid.
pub fn apply_divergence_form(a: &Field, u: &Field, f: Option<&Field>) -> Result<Field> {
    if a.grid.halfspace || u.grid.halfspace {
        return Err(LabError::HalfspaceGrid);
    }
    a.grid.require_same(&u.grid)?;
    if u.components != 1 {
        return Err(LabError::ComponentMismatch { expected: 1, found: u.components });
    }
    let op = DivergenceOperator::new(a)?;
    let mut out = vec![0.0; u.grid.len()];
    op.apply_interior(&u.values, &mut out);
    if let Some(f) = f {
        f.grid.require_same(&u.grid)?;
        if f.components != u.grid.n {
            return Err(LabError::ComponentMismatch { expected: u.grid.n, found: f.components });
        }
        let mut d = vec![0.0; out.len()];
        op.divergence_interior(f, &mut d);
        for (o, x) in out.iter_mut().zip(d) {
            *o += x;
        }
    }
    op.extrapolate_boundary(&mut out);
    Field::new(u.grid.clone(), 1, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::field::identity_coefficients;

    fn box2(nx: usize, h: f64) -> Grid {
        Grid::new(2, vec![nx, nx], vec![-0.5 * (nx - 1) as f64 * h; 2], h, false).unwrap()
    }

    #[test]
    fn second_difference_of_quadratic_is_exact() {
        let g = box2(12, 0.1);
        let a = identity_coefficients(&g);
        let u = Field::scalar_from_fn(&g, |x| x[0] * x[0]);
        let lu = apply_divergence_form(&a, &u, None).unwrap();
        assert!(lu.values.iter().all(|v| (v - 2.0).abs() < 1e-10));
        let c = Field::scalar_from_fn(&g, |_| 3.5);
        assert!(apply_divergence_form(&a, &c, None).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn affine_functions_are_annihilated_by_constant_anisotropic_coefficients() {
        let g = box2(10, 0.2);
        let a = Field::from_fn(&g, 4, |_, o| o.copy_from_slice(&[2.0, 0.4, 0.4, 1.5]));
        let u = Field::scalar_from_fn(&g, |x| 1.0 + 3.0 * x[0] - 2.0 * x[1]);
        let lu = apply_divergence_form(&a, &u, None).unwrap();
        assert!(lu.max_abs() < 1e-11);
    }

    #[test]
    fn mixed_terms_reproduce_constant_second_derivatives() {
        let g = box2(10, 0.1);
        let a = Field::from_fn(&g, 4, |_, o| o.copy_from_slice(&[1.0, 0.3, 0.3, 2.0]));
        let u = Field::scalar_from_fn(&g, |x| x[0] * x[1] + x[1] * x[1]);
        // a11 u_11 + 2 a12 u_12 + a22 u_22 = 0 + 0.6 + 4
        let lu = apply_divergence_form(&a, &u, None).unwrap();
        assert!(lu.values.iter().all(|v| (v - 4.6).abs() < 1e-10));
    }

    #[test]
    fn periodic_sine_converges_at_second_order() {
        let mut errs = Vec::new();
        for &nx in &[16usize, 32, 64] {
            let h = 2.0 * std::f64::consts::PI / nx as f64;
            let g = Grid::with_periodic(2, vec![nx, 4], vec![0.0, 0.0], h, false, vec![true, true]).unwrap();
            let a = identity_coefficients(&g);
            let u = Field::scalar_from_fn(&g, |x| x[0].sin());
            let lu = apply_divergence_form(&a, &u, None).unwrap();
            let e = (0..g.len()).fold(0.0f64, |m, p| m.max((lu.values[p] + g.position(p)[0].sin()).abs()));
            errs.push(e);
        }
        let order1 = (errs[0] / errs[1]).log2();
        let order2 = (errs[1] / errs[2]).log2();
        assert!(order1 > 1.9 && order2 > 1.9, "{errs:?}");
    }

    #[test]
    fn flux_divergence_of_linear_flux() {
        let g = box2(8, 0.25);
        let a = identity_coefficients(&g);
        let u = Field::zeros(&g, 1);
        let f = Field::from_fn(&g, 2, |x, o| {
            o[0] = 2.0 * x[0];
            o[1] = -x[1];
        });
        let lu = apply_divergence_form(&a, &u, Some(&f)).unwrap();
        assert!(lu.values.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn halfspace_grid_is_rejected() {
        let g = Grid::new(2, vec![6, 6], vec![0.0, 0.0], 0.1, true).unwrap();
        let a = identity_coefficients(&g);
        let u = Field::zeros(&g, 1);
        assert!(matches!(apply_divergence_form(&a, &u, None), Err(LabError::HalfspaceGrid)));
    }
}
