//! Laplace fundamental solution and the Neumann / Dirichlet Green functions of
//! the half space, in physical and tangential-Fourier form.

use std::f64::consts::PI;

use crate::error::{LabError, Result};

/// `N = E(x-y) + E(x-y*)` (Neumann) or `N^- = E(x-y) - E(x-y*)` (Dirichlet).
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// `y* = (y', -y_n)`.
pub fn reflect(y: &[f64]) -> Vec<f64> {
    let mut r = y.to_vec();
    if let Some(last) = r.last_mut() {
        *last = -*last;
    }
    r
}

fn check_dim(n: usize) -> Result<()> {
    if n == 2 || n == 3 {
        Ok(())
    } else {
        Err(LabError::InvalidArgument(format!("dimension {n} not supported (n = 2 or 3)")))
    }
}

fn norm2(z: &[f64]) -> f64 {
    z.iter().map(|v| v * v).sum()
}

/// Fundamental solution of the Laplacian: `ln|z| / 2pi` (n = 2), `-1 / (4 pi |z|)` (n = 3).
pub fn eval_e(z: &[f64]) -> Result<f64> {
    check_dim(z.len())?;
    let r2 = norm2(z);
    if r2 == 0.0 {
        return Err(LabError::Coincident);
    }
    Ok(if z.len() == 2 { 0.25 * r2.ln() / PI } else { -1.0 / (4.0 * PI * r2.sqrt()) })
}

/// `grad E(z) = z / (n alpha(n) |z|^n)`.
pub fn grad_e(z: &[f64]) -> Result<Vec<f64>> {
    check_dim(z.len())?;
    let r2 = norm2(z);
    if r2 == 0.0 {
        return Err(LabError::Coincident);
    }
    let c = if z.len() == 2 { 1.0 / (2.0 * PI * r2) } else { 1.0 / (4.0 * PI * r2 * r2.sqrt()) };
    Ok(z.iter().map(|v| v * c).collect())
}

fn diff(x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    if x.len() != y.len() {
        return Err(LabError::InvalidArgument("points of different dimension".into()));
    }
    Ok(x.iter().zip(y).map(|(a, b)| a - b).collect())
}

pub fn eval_n(x: &[f64], y: &[f64], sign: Sign) -> Result<f64> {
    let d = diff(x, y)?;
    let r = diff(x, &reflect(y))?;
    Ok(eval_e(&d)? + sign.factor() * eval_e(&r)?)
}

/// Gradient of `N^±(x, y)` in `y`.
pub fn grad_y_n(x: &[f64], y: &[f64], sign: Sign) -> Result<Vec<f64>> {
    let g1 = grad_e(&diff(x, y)?)?;
    let g2 = grad_e(&diff(x, &reflect(y))?)?;
    let n = x.len();
    Ok((0..n)
        .map(|k| {
            let m = if k + 1 == n { -1.0 } else { 1.0 };
            -g1[k] - sign.factor() * m * g2[k]
        })
        .collect())
}

/// Gradient of `N^±(x, y)` in `x`.
pub fn grad_x_n(x: &[f64], y: &[f64], sign: Sign) -> Result<Vec<f64>> {
    let g1 = grad_e(&diff(x, y)?)?;
    let g2 = grad_e(&diff(x, &reflect(y))?)?;
    Ok(g1.iter().zip(&g2).map(|(a, b)| a + sign.factor() * b).collect())
}

/// Tangential Fourier transform of `N^±` at frequency modulus `rho > 0`:
/// `-(e^{-rho|x-y|} ± e^{-rho(x+y)}) / (2 rho)`.
pub fn n_hat(rho: f64, x: f64, y: f64, sign: Sign) -> f64 {
    if rho == 0.0 {
        return match sign {
            // limit of the Dirichlet function
            Sign::Minus => -x.min(y),
            Sign::Plus => f64::NEG_INFINITY,
        };
    }
    let near = (-rho * (x - y).abs()).exp();
    match sign {
        Sign::Plus => -(near + (-rho * (x + y)).exp()) / (2.0 * rho),
        // e^{-rho|x-y|} - e^{-rho(x+y)} without cancellation at small rho
        Sign::Minus => near * (-2.0 * rho * x.min(y)).exp_m1() / (2.0 * rho),
    }
}

/// `d/dx` of [`n_hat`] (first argument), taking `sgn(0) = 0` on the diagonal.
pub fn n_hat_dx(rho: f64, x: f64, y: f64, sign: Sign) -> f64 {
    let s = if x > y {
        1.0
    } else if x < y {
        -1.0
    } else {
        0.0
    };
    if rho == 0.0 {
        return match sign {
            Sign::Minus => {
                if x < y {
                    -1.0
                } else {
                    0.0
                }
            }
            Sign::Plus => 0.5 * (s + 1.0),
        };
    }
    0.5 * (s * (-rho * (x - y).abs()).exp() + sign.factor() * (-rho * (x + y)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fundamental_solution_values() {
        assert_eq!(eval_e(&[1.0, 0.0]).unwrap(), 0.0);
        assert!((eval_e(&[0.0, std::f64::consts::E]).unwrap() - 0.5 / PI).abs() < 1e-15);
        assert!((eval_e(&[0.0, 0.0, 1.0]).unwrap() + 0.0795774715459477).abs() < 1e-15);
        assert!(matches!(eval_e(&[0.0, 0.0]), Err(LabError::Coincident)));
        assert!(eval_e(&[1.0]).is_err());
    }

    #[test]
    fn neumann_value_and_dirichlet_boundary() {
        let v = eval_n(&[0.0, 1.0], &[0.0, 2.0], Sign::Plus).unwrap();
        assert!((v - 3f64.ln() / (2.0 * PI)).abs() < 1e-15);
        let d = eval_n(&[0.3, 0.0], &[1.1, 0.7], Sign::Minus).unwrap();
        assert!(d.abs() < 1e-15);
        let d3 = eval_n(&[0.3, -0.2, 0.0], &[1.1, 0.4, 0.7], Sign::Minus).unwrap();
        assert!(d3.abs() < 1e-15);
    }

    fn fd<F: Fn(&[f64]) -> f64>(f: F, p: &[f64], k: usize, h: f64) -> f64 {
        let mut a = p.to_vec();
        let mut b = p.to_vec();
        a[k] += h;
        b[k] -= h;
        (f(&a) - f(&b)) / (2.0 * h)
    }

    #[test]
    fn reflection_identities_under_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [2usize, 3] {
            for _ in 0..50 {
                let x: Vec<f64> = (0..n).map(|k| if k + 1 == n { rng.gen_range(0.2..2.0) } else { rng.gen_range(-1.0..1.0) }).collect();
                let y: Vec<f64> = (0..n).map(|k| if k + 1 == n { rng.gen_range(0.2..2.0) } else { rng.gen_range(-1.0..1.0) }).collect();
                if x.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum::<f64>() < 0.01 {
                    continue;
                }
                let h = 1e-4;
                let dyn_n = fd(|q| eval_n(&x, q, Sign::Plus).unwrap(), &y, n - 1, h);
                let dxn_m = fd(|p| eval_n(p, &y, Sign::Minus).unwrap(), &x, n - 1, h);
                assert!((dyn_n + dxn_m).abs() <= 1e-6, "{}", dyn_n + dxn_m);
                for g in 0..n - 1 {
                    for s in [Sign::Plus, Sign::Minus] {
                        let a = fd(|q| eval_n(&x, q, s).unwrap(), &y, g, h);
                        let b = fd(|p| eval_n(p, &y, s).unwrap(), &x, g, h);
                        assert!((a + b).abs() <= 1e-6);
                    }
                }
                for s in [Sign::Plus, Sign::Minus] {
                    let gy = grad_y_n(&x, &y, s).unwrap();
                    let gx = grad_x_n(&x, &y, s).unwrap();
                    for k in 0..n {
                        assert!((gy[k] - fd(|q| eval_n(&x, q, s).unwrap(), &y, k, h)).abs() < 1e-6);
                        assert!((gx[k] - fd(|p| eval_n(p, &y, s).unwrap(), &x, k, h)).abs() < 1e-6);
                    }
                }
            }
        }
    }

    #[test]
    fn fourier_form_matches_tangential_integral() {
        // int N^-(x, y) e^{-i xi d} dd over the tangential line, n = 2, by quadrature
        let (x, y, xi) = (0.7, 1.3, 1.9);
        for s in [Sign::Plus, Sign::Minus] {
            let f = |d: f64| {
                let gy = grad_y_n(&[d, x], &[0.0, y], s).unwrap();
                gy[0] * (xi * d).sin()
            };
            // d_{y_1} N has transform -i xi hat N, an odd function, so int d_{y_1}N sin(xi d) = xi hat N
            let (v, _) = crate::numerics::quad::adaptive_breaks(f, &[-4000.0, -5.0, 0.0, 5.0, 4000.0], 1e-11, 1e-11);
            assert!((v - xi * n_hat(xi, x, y, s)).abs() < 1e-4, "{v} {}", xi * n_hat(xi, x, y, s));
        }
        let h = 1e-6;
        for s in [Sign::Plus, Sign::Minus] {
            for (x, y) in [(0.4, 1.0), (1.5, 0.2)] {
                let fdv = (n_hat(0.8, x + h, y, s) - n_hat(0.8, x - h, y, s)) / (2.0 * h);
                assert!((fdv - n_hat_dx(0.8, x, y, s)).abs() < 1e-8);
            }
        }
        assert!((n_hat(1e-9, 0.4, 1.0, Sign::Minus) - n_hat(0.0, 0.4, 1.0, Sign::Minus)).abs() < 1e-8);
    }
}
