use serde::Serialize;

use super::ladder::DerivativeLadder;
use crate::error::{LabError, Result};
use crate::numerics::Field;

#[derive(Clone, Debug, Serialize)]
pub struct GrowthFit {
    /// smallest A3 with |d_t^k u(t0, x0)| <= A1 A3^{k+1} e^{2 A2 |x0|^2} k^k for all k >= 1
    pub a3: f64,
    /// least-squares estimate of log A3 from the same inequalities, exponentiated
    pub a3_lsq: f64,
    /// |d_t^k u(t0, x0)| for k = 0..=k_max
    pub magnitudes: Vec<f64>,
    /// log|d^k u| - log(A1 e^{2A2|x0|^2} k^k) - (k + 1) log A3, for k = 1..=k_max
    pub residuals: Vec<f64>,
    pub node: usize,
}

impl GrowthFit {
    pub fn bound(&self, k: usize, a1: f64, a2: f64, x0: &[f64]) -> f64 {
        let r2: f64 = x0.iter().map(|v| v * v).sum();
        a1 * self.a3.powi(k as i32 + 1) * (2.0 * a2 * r2).exp() * (k as f64).powi(k as i32)
    }
}

fn nearest_node(f: &Field, x0: &[f64]) -> Result<usize> {
    let g = &f.grid;
    if x0.len() != g.n {
        return Err(LabError::InvalidArgument("x0 has the wrong dimension".into()));
    }
    let mut m = Vec::with_capacity(g.n);
    for a in 0..g.n {
        let i = ((x0[a] - g.origin[a]) / g.h).round();
        let i = if g.periodic[a] {
            i.rem_euclid(g.shape[a] as f64)
        } else if i < 0.0 || i >= g.shape[a] as f64 {
            return Err(LabError::InvalidArgument("x0 outside the grid".into()));
        } else {
            i
        };
        m.push(i as usize);
    }
    Ok(g.index(&m))
}

/// Fits the derivative-growth bound at the grid node nearest to `x0`.
pub fn growth_fit(ladder: &DerivativeLadder, x0: &[f64], a1: f64, a2: f64) -> Result<GrowthFit> {
    let node = nearest_node(&ladder.entries[0], x0)?;
    let magnitudes: Vec<f64> = ladder.entries.iter().map(|e| e.values[node].abs()).collect();
    if magnitudes.iter().any(|v| !v.is_finite()) {
        return Err(LabError::NonFinite("ladder entry".into()));
    }
    let r2: f64 = x0.iter().map(|v| v * v).sum();
    let log_pref = a1.ln() + 2.0 * a2 * r2;
    let mut a3: f64 = 0.0;
    let mut ys = Vec::new();
    for (k, &m) in magnitudes.iter().enumerate().skip(1) {
        let kk = k as f64;
        let rhs = (m.ln() - log_pref - kk * kk.ln()) / (kk + 1.0);
        if m > 0.0 {
            a3 = a3.max(rhs.exp());
            ys.push((kk, m.ln() - log_pref - kk * kk.ln()));
        }
    }
    let a3_lsq = if ys.is_empty() {
        0.0
    } else {
        let num: f64 = ys.iter().map(|(k, y)| (k + 1.0) * y).sum();
        let den: f64 = ys.iter().map(|(k, _)| (k + 1.0) * (k + 1.0)).sum();
        (num / den).exp()
    };
    let la3 = if a3 > 0.0 { a3.ln() } else { f64::NEG_INFINITY };
    let residuals = magnitudes
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &m)| {
            let kk = k as f64;
            m.ln() - log_pref - kk * kk.ln() - (kk + 1.0) * la3
        })
        .collect();
    Ok(GrowthFit { a3, a3_lsq, magnitudes, residuals, node })
}

/// Partial Taylor sum `sum_{j < terms} d_t^j u(t0) (t - t0)^j / j!`.
pub fn taylor_reconstruct(ladder: &DerivativeLadder, delta: f64, t: f64, terms: usize) -> Result<Field> {
    let dt = t - ladder.t0;
    if dt.abs() > delta * (1.0 + 1e-12) {
        return Err(LabError::InvalidArgument(format!("|t - t0| = {} exceeds delta = {delta}", dt.abs())));
    }
    if terms < 6 && terms != ladder.entries.len().min(terms) {
        return Err(LabError::InvalidArgument("at least 6 Taylor terms".into()));
    }
    if terms > ladder.entries.len() {
        return Err(LabError::InvalidArgument(format!(
            "{terms} terms requested, ladder holds {}",
            ladder.entries.len()
        )));
    }
    let mut sum = ladder.entries[0].clone();
    let mut coef = 1.0;
    let mut norms = vec![ladder.entries[0].max_abs()];
    for j in 1..terms {
        coef *= dt / j as f64;
        if coef == 0.0 {
            break;
        }
        sum = sum.axpy(coef, &ladder.entries[j])?;
        norms.push(coef.abs() * ladder.entries[j].max_abs());
    }
    // three consecutive growing terms that are not negligible signal delta beyond the radius
    if norms.len() >= 4 {
        let l = norms.len();
        let growing = norms[l - 3] > norms[l - 4] && norms[l - 2] > norms[l - 3] && norms[l - 1] > norms[l - 2];
        if growing && norms[l - 1] > 1e-8 * sum.max_abs().max(1e-300) {
            return Err(LabError::Divergence("Taylor terms grow; delta exceeds the measured radius".into()));
        }
    }
    Ok(sum)
}

/// `(J, max |reconstruction - reference|)` for J = 1..=ladder length.
pub fn taylor_errors(ladder: &DerivativeLadder, t: f64, reference: &Field) -> Result<Vec<(usize, f64)>> {
    let dt = t - ladder.t0;
    let mut sum = ladder.entries[0].clone();
    let mut out = vec![(1, sum.max_abs_diff(reference))];
    let mut coef = 1.0;
    for j in 1..ladder.entries.len() {
        coef *= dt / j as f64;
        sum = sum.axpy(coef, &ladder.entries[j])?;
        out.push((j + 1, sum.max_abs_diff(reference)));
    }
    Ok(out)
}
