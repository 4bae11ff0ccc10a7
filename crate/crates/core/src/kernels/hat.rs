//! Operators on continuous piecewise-linear functions of the normal variable,
//! sampled at `y_k = k h`, `k = 0..N-1`. All weights are exact integrals of the
//! kernels against the hat functions.

use nalgebra::{DMatrix, DVector};

use crate::numerics::special::{gauss1, gauss_first_moment, gauss_mass};

/// `int_{y0}^{y1} g_s(c - y) l(y) dy` with `l` linear, `l(y0) = v0`, `l(y1) = v1`.
pub fn gauss_linear(s: f64, c: f64, y0: f64, y1: f64, v0: f64, v1: f64) -> f64 {
    // w = c - y runs over [c - y1, c - y0]
    let (lo, hi) = (c - y1, c - y0);
    let m0 = gauss_mass(s, lo, hi);
    let m1 = gauss_first_moment(s, lo, hi);
    // y = c - w; l = v0 + (v1 - v0)(y - y0)/(y1 - y0)
    let slope = (v1 - v0) / (y1 - y0);
    (v0 + slope * (c - y0)) * m0 - slope * m1
}

/// Hat-exact Gaussian operators at time `s` on `n` nodes of spacing `h`.
#[derive(Clone, Debug)]
pub struct GaussHat {
    /// `[i, k] = int g_s(x_i - y) phi_k(y) dy`
    pub wm: DMatrix<f64>,
    /// `[i, k] = int g_s(x_i + y) phi_k(y) dy`
    pub wp: DMatrix<f64>,
    /// `[i, k] = int d_y[g_s(x_i - y)] phi_k(y) dy`
    pub dm: DMatrix<f64>,
    /// `[i, k] = int d_y[g_s(x_i + y)] phi_k(y) dy`
    pub dp: DMatrix<f64>,
    /// `[k] = int g_s(y) phi_k(y) dy`
    pub b: DVector<f64>,
}

impl GaussHat {
    pub fn new(s: f64, n: usize, h: f64) -> Self {
        let y = |k: usize| k as f64 * h;
        let l = y(n - 1);
        let mut wm = DMatrix::zeros(n, n);
        let mut wp = DMatrix::zeros(n, n);
        let mut dm = DMatrix::zeros(n, n);
        let mut dp = DMatrix::zeros(n, n);
        for i in 0..n {
            let x = y(i);
            for k in 0..n {
                let (mut a_m, mut a_p, mut d_m, mut d_p) = (0.0, 0.0, 0.0, 0.0);
                if k > 0 {
                    a_m += gauss_linear(s, x, y(k - 1), y(k), 0.0, 1.0);
                    a_p += gauss_linear(s, -x, y(k - 1), y(k), 0.0, 1.0);
                    // phi' = 1/h on the rising piece, integrated by parts
                    d_m -= gauss_mass(s, x - y(k), x - y(k - 1)) / h;
                    d_p -= gauss_mass(s, x + y(k - 1), x + y(k)) / h;
                }
                if k + 1 < n {
                    a_m += gauss_linear(s, x, y(k), y(k + 1), 1.0, 0.0);
                    a_p += gauss_linear(s, -x, y(k), y(k + 1), 1.0, 0.0);
                    d_m += gauss_mass(s, x - y(k + 1), x - y(k)) / h;
                    d_p += gauss_mass(s, x + y(k), x + y(k + 1)) / h;
                }
                if k == 0 {
                    d_m -= gauss1(s, x);
                    d_p -= gauss1(s, x);
                }
                if k + 1 == n {
                    d_m += gauss1(s, x - l);
                    d_p += gauss1(s, x + l);
                }
                wm[(i, k)] = a_m;
                wp[(i, k)] = a_p;
                dm[(i, k)] = d_m;
                dp[(i, k)] = d_p;
            }
        }
        let b = DVector::from_iterator(n, (0..n).map(|k| wp[(0, k)]));
        GaussHat { wm, wp, dm, dp, b }
    }
}

/// Weights `(a, b)` of the exponential integral over one cell:
/// `int_0^1 s e^{-q(1-s)} ds` and `int_0^1 (1-s) e^{-q(1-s)} ds`.
pub fn exp_cell_weights(q: f64) -> (f64, f64) {
    if q < 0.1 {
        let mut a = 0.0;
        let mut b = 0.0;
        let mut term = 0.5;
        for m in 0..14 {
            a += term;
            b += (m as f64 + 1.0) * term;
            term *= -q / (m as f64 + 3.0);
        }
        (a, b)
    } else {
        let e = (-q).exp();
        ((q - 1.0 + e) / (q * q), (1.0 - e * (1.0 + q)) / (q * q))
    }
}

/// Exact integrals of `e^{-rho|x - z|}` and `e^{-rho(x + z)}` against a
/// piecewise-linear function, by two O(N) sweeps.
#[derive(Clone, Copy, Debug)]
pub struct ExpConv {
    pub rho: f64,
    pub h: f64,
    decay: f64,
    a: f64,
    b: f64,
}

impl ExpConv {
    pub fn new(rho: f64, h: f64) -> Self {
        let q = rho * h;
        let (a, b) = exp_cell_weights(q);
        ExpConv { rho, h, decay: (-q).exp(), a, b }
    }

    /// `L_i = int_0^{y_i} e^{-rho(y_i - z)} v(z) dz`.
    pub fn left(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        for i in 1..v.len() {
            out[i] = self.decay * out[i - 1] + self.h * (self.a * v[i] + self.b * v[i - 1]);
        }
        out
    }

    /// `R_i = int_{y_i}^{L} e^{-rho(z - y_i)} v(z) dz`.
    pub fn right(&self, v: &[f64]) -> Vec<f64> {
        let n = v.len();
        let mut out = vec![0.0; n];
        for i in (0..n.saturating_sub(1)).rev() {
            out[i] = self.decay * out[i + 1] + self.h * (self.a * v[i] + self.b * v[i + 1]);
        }
        out
    }

    /// `int N^±^(y_i, z) v(z) dz` for `rho > 0`, with the Neumann (`+`) or Dirichlet (`-`) sign.
    pub fn potential(&self, v: &[f64], sign: f64) -> Vec<f64> {
        let l = self.left(v);
        let r = self.right(v);
        let c = -0.5 / self.rho;
        (0..v.len())
            .map(|i| {
                let x = i as f64 * self.h;
                c * (l[i] + r[i] + sign * (-self.rho * x).exp() * r[0])
            })
            .collect()
    }

    /// `int d_x N^±^(y_i, z) v(z) dz`.
    pub fn potential_dx(&self, v: &[f64], sign: f64) -> Vec<f64> {
        let l = self.left(v);
        let r = self.right(v);
        (0..v.len())
            .map(|i| {
                let x = i as f64 * self.h;
                0.5 * (l[i] - r[i] + sign * (-self.rho * x).exp() * r[0])
            })
            .collect()
    }

    /// `int d_z N^±^(y_i, z) v(z) dz = int (-sgn(y_i - z) e^{-rho|y_i - z|} ± e^{-rho(y_i + z)}) v / 2`.
    pub fn potential_dz(&self, v: &[f64], sign: f64) -> Vec<f64> {
        let l = self.left(v);
        let r = self.right(v);
        (0..v.len())
            .map(|i| {
                let x = i as f64 * self.h;
                0.5 * (r[i] - l[i] + sign * (-self.rho * x).exp() * r[0])
            })
            .collect()
    }
}

/// Mode-zero Dirichlet potential `int -min(y_i, z) v(z) dz` and its derivative.
pub fn dirichlet_potential_zero(v: &[f64], h: f64) -> (Vec<f64>, Vec<f64>) {
    let n = v.len();
    // cumulative integrals of v and z v over [0, y_i], exact for linear pieces
    let mut m0 = vec![0.0; n];
    let mut m1 = vec![0.0; n];
    for i in 1..n {
        let (y0, y1) = ((i - 1) as f64 * h, i as f64 * h);
        m0[i] = m0[i - 1] + 0.5 * h * (v[i - 1] + v[i]);
        m1[i] = m1[i - 1] + h * (v[i - 1] * (2.0 * y0 + y1) + v[i] * (y0 + 2.0 * y1)) / 6.0;
    }
    let total = m0[n - 1];
    let pot = (0..n)
        .map(|i| {
            let y = i as f64 * h;
            -(m1[i] + y * (total - m0[i]))
        })
        .collect();
    let dpot = (0..n).map(|i| -(total - m0[i])).collect();
    (pot, dpot)
}
