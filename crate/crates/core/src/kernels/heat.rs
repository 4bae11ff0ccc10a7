//! Heat kernel `Gamma(t, x) = (4 pi t)^{-n/2} exp(-|x|^2 / 4t)` and its time
//! derivatives.

use std::f64::consts::PI;

use crate::error::{LabError, Result};

/// Coefficients `c_m` of `Q_s(tau) = sum c_m tau^m` with
/// `d_t^s Gamma = Gamma Q_s(1/t)`, for `a = |x|^2 / 4`.
pub fn time_derivative_poly(s: usize, n: usize, a: f64) -> Vec<f64> {
    let mut q = vec![1.0];
    let half_n = 0.5 * n as f64;
    for _ in 0..s {
        // Q_{s+1} = Q_s (a tau^2 - (n/2) tau) - tau^2 Q_s'
        let mut next = vec![0.0; q.len() + 2];
        for (m, &c) in q.iter().enumerate() {
            next[m + 2] += a * c;
            next[m + 1] -= half_n * c;
            if m > 0 {
                next[m + 1] -= m as f64 * c;
            }
        }
        q = next;
    }
    q
}

fn check(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(LabError::InvalidArgument(format!("heat kernel needs t > 0, got {t}")))
    }
}

/// `d_t^s Gamma(t, x)`.
pub fn eval_gamma(t: f64, x: &[f64], s: usize) -> Result<f64> {
    check(t)?;
    let n = x.len();
    let r2: f64 = x.iter().map(|v| v * v).sum();
    let g = (-r2 / (4.0 * t)).exp() / (4.0 * PI * t).powf(0.5 * n as f64);
    if s == 0 {
        return Ok(g);
    }
    let q = time_derivative_poly(s, n, 0.25 * r2);
    let tau = 1.0 / t;
    let p = q.iter().rev().fold(0.0, |acc, c| acc * tau + c);
    Ok(g * p)
}

/// `grad_x Gamma(t, x) = -x Gamma / 2t`.
pub fn grad_gamma(t: f64, x: &[f64]) -> Result<Vec<f64>> {
    let g = eval_gamma(t, x, 0)?;
    Ok(x.iter().map(|v| -v * g / (2.0 * t)).collect())
}

/// `|| grad Gamma(t, .) ||_{L^1} = E|Z| / sqrt(2t)` for a standard normal `Z` in `R^n`, n <= 3.
pub fn grad_gamma_l1(t: f64, n: usize) -> f64 {
    let chi_mean = match n {
        1 => (2.0 / PI).sqrt(),
        2 => (PI / 2.0).sqrt(),
        3 => 2.0 * (2.0 / PI).sqrt(),
        _ => f64::NAN,
    };
    chi_mean * (2.0 * t).sqrt() / (2.0 * t)
}
