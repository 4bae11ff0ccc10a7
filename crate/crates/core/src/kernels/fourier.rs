//! Half-space kernels after a Fourier transform in the tangential variables.
//! Convention: `f^(xi) = int f(x') e^{-i xi.x'} dx'`, so `d_{x_b} <-> i xi_b` and,
//! for kernels of `x' - y'`, `d_{y_b} <-> -i xi_b`.

use num_complex::Complex64;

use super::laplace::{n_hat, n_hat_dx, Sign};
use crate::numerics::quad::adaptive_breaks;
use crate::numerics::special::{erfcx, gauss1};

/// `J(x, y) = int_0^x e^{-rho (x - z)} g_t(z + y) dz` for `x, y >= 0`, written with
/// scaled complementary error functions so that no exponential overflows.
pub fn j_exp(t: f64, rho: f64, x: f64, y: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let st = t.sqrt();
    let big_x = x + y;
    let a = (y - 2.0 * t * rho) / (2.0 * st);
    let b = (big_x - 2.0 * t * rho) / (2.0 * st);
    let ea = -rho * x - y * y / (4.0 * t);
    let eb = -big_x * big_x / (4.0 * t);
    let v = if a >= 0.0 {
        erfcx(a) * ea.exp() - erfcx(b) * eb.exp()
    } else if b >= 0.0 {
        let e0 = -rho * big_x + t * rho * rho;
        2.0 * e0.exp() - erfcx(-a) * ea.exp() - erfcx(b) * eb.exp()
    } else {
        erfcx(-b) * eb.exp() - erfcx(-a) * ea.exp()
    };
    (0.5 * v).max(0.0)
}

/// `d_y J = g_t(x + y) - e^{-rho x} g_t(y) - rho J`.
pub fn j_exp_dy(t: f64, rho: f64, x: f64, y: f64) -> f64 {
    gauss1(t, x + y) - (-rho * x).exp() * gauss1(t, y) - rho * j_exp(t, rho, x, y)
}

/// Tangential frequency vector with its modulus.
#[derive(Clone, Debug)]
pub struct Mode {
    pub xi: Vec<f64>,
    pub rho: f64,
}

impl Mode {
    pub fn new(xi: &[f64]) -> Self {
        let rho = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
        Mode { xi: xi.to_vec(), rho }
    }

    pub fn n(&self) -> usize {
        self.xi.len() + 1
    }

    /// Multiplier `c_ij` of `J` in the correction part of `G^`.
    pub fn c(&self, i: usize, j: usize) -> Complex64 {
        let n = self.n();
        if j + 1 == n || self.rho == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if i + 1 == n {
            Complex64::new(0.0, 2.0 * self.xi[j])
        } else {
            Complex64::new(2.0 * self.xi[i] * self.xi[j] / self.rho, 0.0)
        }
    }
}

fn images(t: f64, x: f64, y: f64) -> f64 {
    gauss1(t, x - y) - gauss1(t, x + y)
}

fn images_dy(t: f64, x: f64, y: f64) -> f64 {
    ((x - y) * gauss1(t, x - y) + (x + y) * gauss1(t, x + y)) / (2.0 * t)
}

/// `G^_ij(t; xi; x_n, y_n)`.
pub fn g_hat(t: f64, m: &Mode, x: f64, y: f64, i: usize, j: usize) -> Complex64 {
    let damp = (-t * m.rho * m.rho).exp();
    let mut v = m.c(i, j) * j_exp(t, m.rho, x, y);
    if i == j {
        v += images(t, x, y);
    }
    v * damp
}

/// `G*^_ij = G^_ij - delta_ij Gamma^` (the reflected heat kernel plus the correction).
pub fn g_star_hat(t: f64, m: &Mode, x: f64, y: f64, i: usize, j: usize) -> Complex64 {
    let damp = (-t * m.rho * m.rho).exp();
    let mut v = m.c(i, j) * j_exp(t, m.rho, x, y);
    if i == j {
        v -= gauss1(t, x + y);
    }
    v * damp
}

/// `d_{y_n} G^_ij`.
pub fn g_hat_dyn(t: f64, m: &Mode, x: f64, y: f64, i: usize, j: usize) -> Complex64 {
    let damp = (-t * m.rho * m.rho).exp();
    let mut v = m.c(i, j) * j_exp_dy(t, m.rho, x, y);
    if i == j {
        v += images_dy(t, x, y);
    }
    v * damp
}

/// The four `z`-integrals from which every `K^_ijq` at one frequency modulus
/// is assembled: `int_0^inf {images, J}(x_n, z) {N^±, d_z N^±}(z, y_n) dz`.
#[derive(Clone, Copy, Debug, Default)]
pub struct RadialK {
    pub images_n: f64,
    pub j_n: f64,
    pub images_dn: f64,
    pub j_dn: f64,
}

impl RadialK {
    pub fn compute(t: f64, rho: f64, x: f64, y: f64, sign: Sign, r_trunc: f64, tol: f64) -> Self {
        let zmax = x + r_trunc * t.sqrt();
        let mut br = vec![0.0, x.min(zmax), zmax];
        if y < zmax {
            br.push(y);
        }
        br.sort_by(|a, b| a.partial_cmp(b).unwrap());
        br.dedup();
        let q = |f: &dyn Fn(f64) -> f64| adaptive_breaks(f, &br, tol, tol).0;
        RadialK {
            images_n: q(&|z| images(t, x, z) * n_hat(rho, z, y, sign)),
            j_n: q(&|z| j_exp(t, rho, x, z) * n_hat(rho, z, y, sign)),
            images_dn: q(&|z| images(t, x, z) * n_hat_dx(rho, z, y, sign)),
            j_dn: q(&|z| j_exp(t, rho, x, z) * n_hat_dx(rho, z, y, sign)),
        }
    }
}

/// `K^_ijq` from the radial integrals at the mode `m`.
pub fn k_hat(t: f64, m: &Mode, r: &RadialK, i: usize, j: usize, q: usize) -> Complex64 {
    let n = m.n();
    let damp = (-t * m.rho * m.rho).exp();
    let (im, jj) = if q + 1 == n {
        (Complex64::new(r.images_dn, 0.0), Complex64::new(r.j_dn, 0.0))
    } else {
        let f = Complex64::new(0.0, m.xi[q]);
        (f * r.images_n, f * r.j_n)
    };
    let mut v = m.c(i, j) * jj;
    if i == j {
        v += im;
    }
    v * damp
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::quad::adaptive;

    #[test]
    fn j_matches_direct_quadrature() {
        for &(t, rho, x, y) in &[
            (1.0, 0.5, 1.0, 0.3),
            (0.01, 3.0, 0.5, 0.05),
            (0.1, 40.0, 2.0, 0.0),
            (2.0, 0.0, 3.0, 1.0),
            (0.05, 0.2, 5.0, 4.0),
            (1e-3, 200.0, 0.2, 0.01),
        ] {
            let (v, _) = adaptive(|z| (-rho * (x - z)).exp() * gauss1(t, z + y), 0.0, x, 1e-15, 1e-12);
            let j = j_exp(t, rho, x, y);
            assert!((j - v).abs() <= 1e-10 * v.abs().max(1e-300) + 1e-16, "{t} {rho} {x} {y}: {j} vs {v}");
        }
        assert_eq!(j_exp(1.0, 1.0, 0.0, 0.5), 0.0);
    }

    #[test]
    fn j_derivative_closed_form() {
        for &(t, rho, x, y) in &[(0.5, 1.0, 1.0, 0.4), (0.02, 5.0, 0.3, 0.1), (1.0, 0.0, 2.0, 0.0)] {
            let h = 1e-6;
            let fd = (j_exp(t, rho, x, y + h) - j_exp(t, rho, x, (y - h).max(0.0))) / (y + h - (y - h).max(0.0));
            assert!((fd - j_exp_dy(t, rho, x, y)).abs() < 1e-6, "{fd} {}", j_exp_dy(t, rho, x, y));
        }
    }

    #[test]
    fn dirichlet_and_vanishing_normal_column() {
        let m = Mode::new(&[1.3]);
        for i in 0..2 {
            for j in 0..2 {
                assert!(g_hat(0.3, &m, 0.0, 0.7, i, j).norm() < 1e-16);
            }
        }
        assert_eq!(m.c(0, 1), Complex64::new(0.0, 0.0));
        assert_eq!(m.c(1, 1), Complex64::new(0.0, 0.0));
        assert_eq!(Mode::new(&[0.0]).c(0, 0), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn star_part_is_difference() {
        let m = Mode::new(&[0.4, -0.9]);
        for i in 0..3 {
            for j in 0..3 {
                let d = g_hat(0.2, &m, 0.5, 0.8, i, j) - g_star_hat(0.2, &m, 0.5, 0.8, i, j);
                let e = if i == j { (-0.2 * m.rho * m.rho).exp() * gauss1(0.2, 0.5 - 0.8) } else { 0.0 };
                assert!((d.re - e).abs() < 1e-15 && d.im.abs() < 1e-15);
            }
        }
    }
}
