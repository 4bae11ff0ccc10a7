//! Mode-space action of `G(s)` and `d_{y_n} G(s)` on piecewise-linear normal
//! profiles, with all weights exact for the hat basis.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::kernels::fourier::j_exp;
use crate::kernels::hat::{gauss_linear, GaussHat};
use crate::projection::ModeGrid;

/// Kernel weights at one time `s > 0`, shared by every tangential mode.
pub struct Slab {
    pub s: f64,
    /// images `int (g(x - y) - g(x + y)) phi_k`
    im: DMatrix<f64>,
    /// `int d_y (g(x - y) - g(x + y)) phi_k`
    dim: DMatrix<f64>,
    wp: DMatrix<f64>,
    b: Vec<f64>,
    /// per cell `c`: `int_cell g(x_i + y) (1, theta)` and `int_cell g(y) (1, theta)`
    rp: Vec<Vec<(f64, f64)>>,
    r0: Vec<(f64, f64)>,
    /// cells beyond this carry no weight
    cells: usize,
    h: f64,
}

fn mv(m: &DMatrix<f64>, v: &[Complex64]) -> Vec<Complex64> {
    let (r, c) = m.shape();
    let mut out = vec![Complex64::new(0.0, 0.0); r];
    for k in 0..c {
        let x = v[k];
        if x.re == 0.0 && x.im == 0.0 {
            continue;
        }
        let col = m.column(k);
        for (o, a) in out.iter_mut().zip(col.iter()) {
            *o += *a * x;
        }
    }
    out
}

impl Slab {
    pub fn new(s: f64, nn: usize, h: f64) -> Self {
        let gh = GaussHat::new(s, nn, h);
        let cells = (((12.0 * s.sqrt()) / h).ceil() as usize + 1).min(nn - 1);
        let y = |k: usize| k as f64 * h;
        let moments = |c0: f64, k: usize| (gauss_linear(s, c0, y(k), y(k + 1), 1.0, 1.0), gauss_linear(s, c0, y(k), y(k + 1), 0.0, 1.0));
        let rp = (0..nn).map(|i| (0..cells).map(|k| moments(-y(i), k)).collect()).collect();
        let r0 = (0..cells).map(|k| moments(0.0, k)).collect();
        Slab { s, im: &gh.wm - &gh.wp, dim: &gh.dm - &gh.dp, wp: gh.wp, b: gh.b.iter().cloned().collect(), rp, r0, cells, h }
    }

    /// `[i, k] = int J(x_i, y) phi_k(y) dy` with `J(x, y) = int_0^x e^{-rho(x - z)} g(z + y) dz`,
    /// from `d_y J + rho J = g(x + y) - e^{-rho x} g(y)` integrated cell by cell.
    fn j_matrix(&self, rho: f64) -> DMatrix<f64> {
        let nn = self.rp.len();
        let h = self.h;
        let mut m = DMatrix::zeros(nn, self.cells + 1);
        for i in 1..nn {
            let x = i as f64 * h;
            let ex = (-rho * x).exp();
            let jv: Vec<f64> = (0..=self.cells).map(|k| j_exp(self.s, rho, x, k as f64 * h)).collect();
            for c in 0..self.cells {
                let (p0, p1) = self.rp[i][c];
                let (q0, q1) = self.r0[c];
                let i0 = (p0 - ex * q0 - (jv[c + 1] - jv[c])) / rho;
                let i1 = (p1 - ex * q1 - jv[c + 1] + i0 / h) / rho;
                m[(i, c)] += i0 - i1;
                m[(i, c + 1)] += i1;
            }
        }
        m
    }

    /// `sum_j [G_ij a_j + d_{y_n} G_ij b_j]` for one mode; `b` holds the
    /// tangential columns only (the normal one never occurs).
    pub fn apply(&self, mg: &ModeGrid, m: usize, a: &[Vec<Complex64>], b: Option<&[Vec<Complex64>]>) -> Vec<Vec<Complex64>> {
        let n = mg.n;
        let nn = n - 1;
        let xi = &mg.xis[m];
        let rho = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
        let damp = (-self.s * rho * rho).exp();
        let mut out: Vec<Vec<Complex64>> = (0..n).map(|j| mv(&self.im, &a[j])).collect();
        if let Some(b) = b {
            for j in 0..nn {
                for (o, v) in out[j].iter_mut().zip(mv(&self.dim, &b[j])) {
                    *o += v;
                }
            }
        }
        if rho > 0.0 {
            let mut jm: Option<DMatrix<f64>> = None;
            // c_gb = 2 xi_g xi_b / rho, c_nb = 2 i xi_b; d_y J = g(x + y) - e^{-rho x} g(y) - rho J
            for beta in 0..nn {
                if xi[beta] == 0.0 {
                    continue;
                }
                let mut src = a[beta].clone();
                let mut extra = vec![Complex64::new(0.0, 0.0); a[beta].len()];
                if let Some(b) = b {
                    for (s, v) in src.iter_mut().zip(&b[beta]) {
                        *s -= rho * v;
                    }
                    extra = mv(&self.wp, &b[beta]);
                    let b0: Complex64 = self.b.iter().zip(&b[beta]).map(|(w, v)| *w * v).sum();
                    for (k, e) in extra.iter_mut().enumerate() {
                        *e -= (-rho * k as f64 * self.h).exp() * b0;
                    }
                }
                let mut jv = mv(jm.get_or_insert_with(|| self.j_matrix(rho)), &src[..self.cells + 1]);
                for (j, e) in jv.iter_mut().zip(&extra) {
                    *j += e;
                }
                for i in 0..n {
                    let c = if i == nn { Complex64::new(0.0, 2.0 * xi[beta]) } else { Complex64::new(2.0 * xi[i] * xi[beta] / rho, 0.0) };
                    if c.norm() == 0.0 {
                        continue;
                    }
                    for (o, v) in out[i].iter_mut().zip(&jv) {
                        *o += c * v;
                    }
                }
            }
        }
        for col in out.iter_mut() {
            for v in col.iter_mut() {
                *v *= damp;
            }
        }
        out
    }
}
