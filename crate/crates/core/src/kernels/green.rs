//! Pointwise evaluation of the half-space Stokes kernels `G_ij`, `G*_ij` and `K_ijq`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fourier::{g_star_hat, k_hat, Mode, RadialK};
use super::heat::{eval_gamma, grad_gamma};
use super::laplace::{grad_e, reflect, Sign};
use crate::error::{LabError, Result};
use crate::numerics::quad::adaptive_breaks;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Gaussian truncation radius in units of `sqrt(t)`.
    pub r_trunc: f64,
    /// Nodes per axis for tabulated (grid) evaluations.
    pub nodes: usize,
    /// Exclusion radius for pointwise singular integrands.
    pub eps_sing: f64,
    /// Relative tolerance requested from adaptive quadrature.
    pub tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { r_trunc: 12.0, nodes: 64, eps_sing: 1e-3, tol: 1e-9 }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_trunc >= 6.0) {
            return Err(LabError::InvalidArgument(format!("r_trunc = {} < 6", self.r_trunc)));
        }
        if !(self.eps_sing > 0.0) || !(self.tol > 0.0) || self.nodes < 2 {
            return Err(LabError::InvalidArgument("eps_sing, tol must be positive and nodes >= 2".into()));
        }
        Ok(())
    }
}

/// How the correction part of `G` is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    /// Slab quadrature of the defining integral in physical variables.
    Physical,
    /// Inverse tangential Fourier transform of the closed-form mode function.
    Fourier,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelId {
    E,
    N,
    Nminus,
    Gamma,
    G,
    Gstar,
    K,
}

impl std::str::FromStr for KernelId {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "E" => KernelId::E,
            "N" => KernelId::N,
            "Nminus" => KernelId::Nminus,
            "Gamma" => KernelId::Gamma,
            "G" => KernelId::G,
            "Gstar" => KernelId::Gstar,
            "K" => KernelId::K,
            _ => return Err(LabError::InvalidArgument(format!("unknown kernel {s}"))),
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KernelQuery {
    pub kernel: KernelId,
    /// Zero-based `(i, j, q)`; unused entries are ignored.
    pub indices: [usize; 3],
    pub t: Option<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    #[serde(default)]
    pub sign: Option<Sign>,
    #[serde(default)]
    pub deriv: usize,
}

/// Evaluates any kernel named by the query with the default spec.
pub fn eval_query(q: &KernelQuery, spec: &QuadratureSpec) -> Result<f64> {
    use super::laplace::{eval_e, eval_n};
    let diff: Vec<f64> = q.x.iter().zip(&q.y).map(|(a, b)| a - b).collect();
    let need_t = || q.t.ok_or_else(|| LabError::InvalidArgument("t is required for this kernel".into()));
    let [i, j, k] = q.indices;
    match q.kernel {
        KernelId::E => eval_e(&diff),
        KernelId::N => eval_n(&q.x, &q.y, Sign::Plus),
        KernelId::Nminus => eval_n(&q.x, &q.y, Sign::Minus),
        KernelId::Gamma => eval_gamma(need_t()?, &diff, q.deriv),
        KernelId::G => Ok(eval_g_deriv(need_t()?, &q.x, &q.y, i, j, q.deriv, spec)?.0),
        KernelId::Gstar => Ok(eval_g_deriv(need_t()?, &q.x, &q.y, i, j, q.deriv, spec)?.1),
        KernelId::K => Ok(eval_k(need_t()?, &q.x, &q.y, i, j, k, q.sign.unwrap_or(Sign::Plus), spec)?.0),
    }
}

fn check_points(t: f64, x: &[f64], y: &[f64], i: usize, j: usize) -> Result<usize> {
    let n = x.len();
    if n != y.len() || !(n == 2 || n == 3) {
        return Err(LabError::InvalidArgument("points must share dimension 2 or 3".into()));
    }
    if !(t > 0.0) {
        return Err(LabError::InvalidArgument(format!("t = {t} must be positive")));
    }
    if x[n - 1] < 0.0 || y[n - 1] < 0.0 {
        return Err(LabError::InvalidArgument("points must lie in the closed half space".into()));
    }
    if i >= n || j >= n {
        return Err(LabError::InvalidArgument("index out of range".into()));
    }
    Ok(n)
}

/// Correction `4 (1 - delta_jn) d_{x_j} int_0^{x_n} int d_{x_i}E(x - z) Gamma(t, z - y*) dz`
/// by slab quadrature, with `d_{x_j}` moved onto the heat kernel as `d_{z_j}`.
fn correction_physical(t: f64, x: &[f64], y: &[f64], i: usize, j: usize, spec: &QuadratureSpec) -> Result<(f64, f64)> {
    let n = x.len();
    if j + 1 == n || x[n - 1] == 0.0 {
        return Ok((0.0, 0.0));
    }
    let ys = reflect(y);
    let st = t.sqrt();
    let r = spec.r_trunc * st;
    // the heat factor is negligible once z_n + y_n > r
    let top = x[n - 1].min((r - y[n - 1]).max(0.0));
    if top <= 0.0 {
        return Ok((0.0, 0.0));
    }
    let tol = spec.tol;
    let mut err_acc = 0.0;
    let integrand = |z: &[f64]| -> f64 {
        let w: Vec<f64> = x.iter().zip(z).map(|(a, b)| a - b).collect();
        let zy: Vec<f64> = z.iter().zip(&ys).map(|(a, b)| a - b).collect();
        match grad_e(&w) {
            Ok(ge) => ge[i] * grad_gamma(t, &zy).map(|g| g[j]).unwrap_or(0.0),
            Err(_) => 0.0,
        }
    };
    let scale = eval_gamma(t, &vec![0.0; n], 0)? / st;
    let abs_tol = tol * scale * st.powi(n as i32);
    let (v, e) = if n == 2 {
        adaptive_breaks(
            |zn| {
                let mut br = vec![y[0] - r, y[0] + r];
                if (x[0] - y[0]).abs() < r {
                    br.push(x[0]);
                }
                br.sort_by(|a, b| a.partial_cmp(b).unwrap());
                adaptive_breaks(|z1| integrand(&[z1, zn]), &br, abs_tol, tol).0
            },
            &[0.0, top],
            abs_tol,
            tol,
        )
    } else {
        // polar coordinates about x' in the tangential plane
        let dxy = ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt();
        let rho_lo = (dxy - r).max(0.0);
        let rho_hi = dxy + r;
        adaptive_breaks(
            |zn| {
                adaptive_breaks(
                    |rho| {
                        let f = |th: f64| {
                            let z = [x[0] + rho * th.cos(), x[1] + rho * th.sin(), zn];
                            rho * integrand(&z)
                        };
                        let phi = (y[1] - x[1]).atan2(y[0] - x[0]);
                        adaptive_breaks(f, &[phi - PI, phi, phi + PI], abs_tol, tol).0
                    },
                    &[rho_lo, dxy.clamp(rho_lo, rho_hi), rho_hi],
                    abs_tol,
                    tol,
                )
                .0
            },
            &[0.0, top],
            abs_tol,
            tol,
        )
    };
    err_acc += e;
    Ok((4.0 * v, 4.0 * err_acc))
}

/// `(1/(2pi)^{n-1}) int f(xi) e^{i xi.d} dxi` for a mode function decaying like
/// `e^{-t |xi|^2}`.
pub fn inverse_tangential<F: Fn(&Mode) -> Complex64>(t: f64, d: &[f64], f: F, spec: &QuadratureSpec) -> f64 {
    let xi_max = 2.0 * spec.r_trunc / t.sqrt();
    let tol = spec.tol;
    if d.len() == 1 {
        let g = |xi: f64| (f(&Mode::new(&[xi])) * Complex64::new(0.0, xi * d[0]).exp()).re;
        let scale = 1.0 / t.sqrt();
        let (v, _) = adaptive_breaks(g, &[-xi_max, 0.0, xi_max], tol * scale * 1e-3, tol);
        v / (2.0 * PI)
    } else {
        let dn = (d[0] * d[0] + d[1] * d[1]).sqrt();
        let radial = |rho: f64| {
            let m = (2 * (rho * dn).ceil() as usize + 24).min(4096);
            let mut s = 0.0;
            for k in 0..m {
                let th = 2.0 * PI * k as f64 / m as f64;
                let xi = [rho * th.cos(), rho * th.sin()];
                s += (f(&Mode::new(&xi)) * Complex64::new(0.0, xi[0] * d[0] + xi[1] * d[1]).exp()).re;
            }
            rho * s * 2.0 * PI / m as f64
        };
        let scale = 1.0 / t;
        let (v, _) = adaptive_breaks(radial, &[0.0, xi_max], tol * scale * 1e-3, tol);
        v / (4.0 * PI * PI)
    }
}

/// `(G_ij, G*_ij)` at `(t; x, y)`; indices are zero-based.
pub fn eval_g(t: f64, x: &[f64], y: &[f64], i: usize, j: usize, spec: &QuadratureSpec) -> Result<(f64, f64)> {
    eval_g_route(t, x, y, i, j, spec, Route::Physical).map(|(g, s, _)| (g, s))
}

/// Like [`eval_g`] with an explicit route; the third entry is the quadrature
/// error estimate of the correction.
pub fn eval_g_route(t: f64, x: &[f64], y: &[f64], i: usize, j: usize, spec: &QuadratureSpec, route: Route) -> Result<(f64, f64, f64)> {
    let n = check_points(t, x, y, i, j)?;
    spec.validate()?;
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let ds: Vec<f64> = x.iter().zip(reflect(y)).map(|(a, b)| a - b).collect();
    let direct = if i == j { eval_gamma(t, &d, 0)? } else { 0.0 };
    let reflected = if i == j { eval_gamma(t, &ds, 0)? } else { 0.0 };
    let (corr, err) = match route {
        Route::Physical => correction_physical(t, x, y, i, j, spec)?,
        Route::Fourier => {
            let dt: Vec<f64> = d[..n - 1].to_vec();
            let (xn, yn) = (x[n - 1], y[n - 1]);
            let v = inverse_tangential(t, &dt, |m| g_star_hat(t, m, xn, yn, i, j), spec);
            // the reflected heat kernel is part of G*^; take it back out
            (v + reflected, 0.0)
        }
    };
    let star = corr - reflected;
    Ok((direct + star, star, err))
}

/// Time derivative of order `s <= 2`: exact for the heat parts, centred
/// differences for the correction.
pub fn eval_g_deriv(t: f64, x: &[f64], y: &[f64], i: usize, j: usize, s: usize, spec: &QuadratureSpec) -> Result<(f64, f64)> {
    if s == 0 {
        return eval_g(t, x, y, i, j, spec);
    }
    if s > 2 {
        return Err(LabError::InvalidArgument("time derivatives of G beyond order 2 are not supported".into()));
    }
    let n = check_points(t, x, y, i, j)?;
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let ds: Vec<f64> = x.iter().zip(reflect(y)).map(|(a, b)| a - b).collect();
    let direct = if i == j { eval_gamma(t, &d, s)? } else { 0.0 };
    let reflected = if i == j { eval_gamma(t, &ds, s)? } else { 0.0 };
    let h = 1e-3 * t;
    let c = |tt: f64| correction_physical(tt, x, y, i, j, spec).map(|v| v.0);
    let corr = if j + 1 == n {
        0.0
    } else if s == 1 {
        (c(t + h)? - c(t - h)?) / (2.0 * h)
    } else {
        (c(t + h)? - 2.0 * c(t)? + c(t - h)?) / (h * h)
    };
    let star = corr - reflected;
    Ok((direct + star, star))
}

/// `K_ijq(t; x, y) = int G_ij(t; x, z) d_{z_q} N^±(z, y) dz` (zero-based indices)
/// through its tangential Fourier transform. Returns the value and the spread
/// between two tolerances as an error estimate.
#[allow(clippy::too_many_arguments)]
pub fn eval_k(t: f64, x: &[f64], y: &[f64], i: usize, j: usize, q: usize, sign: Sign, spec: &QuadratureSpec) -> Result<(f64, f64)> {
    let n = check_points(t, x, y, i, j)?;
    if q >= n {
        return Err(LabError::InvalidArgument("index q out of range".into()));
    }
    spec.validate()?;
    let d: Vec<f64> = x[..n - 1].iter().zip(&y[..n - 1]).map(|(a, b)| a - b).collect();
    let (xn, yn) = (x[n - 1], y[n - 1]);
    let eval = |tol: f64| {
        let inner = QuadratureSpec { tol, ..spec.clone() };
        inverse_tangential(
            t,
            &d,
            |m| {
                let r = RadialK::compute(t, m.rho, xn, yn, sign, spec.r_trunc, tol * 1e-2);
                k_hat(t, m, &r, i, j, q)
            },
            &inner,
        )
    };
    let v = eval(spec.tol);
    let v2 = eval(spec.tol * 100.0);
    if !v.is_finite() {
        return Err(LabError::NonFinite("K quadrature".into()));
    }
    Ok((v, (v - v2).abs()))
}
