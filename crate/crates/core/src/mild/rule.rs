//! Time nodes and product integration against `(t - tau)^{-1/2}`.

use crate::error::{LabError, Result};
use crate::numerics::quad::gauss_legendre;

/// `t_i = T (i / m)^2`, `i = 0..=m`.
pub fn graded_nodes(horizon: f64, m: usize) -> Vec<f64> {
    (0..=m).map(|i| horizon * (i as f64 / m as f64).powi(2)).collect()
}

/// Chebyshev-Lobatto points on `[a, b]` in increasing order.
pub fn chebyshev_nodes(a: f64, b: f64, count: usize) -> Vec<f64> {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    (0..count)
        .map(|k| c - r * (std::f64::consts::PI * k as f64 / (count - 1) as f64).cos())
        .collect()
}

/// Sorted union of node sets; points closer than `1e-12 * max` are merged.
pub fn merge_nodes(sets: &[&[f64]]) -> Vec<f64> {
    let mut all: Vec<f64> = sets.iter().flat_map(|s| s.iter().cloned()).collect();
    all.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let scale = all.last().cloned().unwrap_or(1.0).abs().max(1e-300);
    let mut out: Vec<f64> = Vec::with_capacity(all.len());
    for t in all {
        if out.last().map_or(true, |&l| t - l > 1e-12 * scale) {
            out.push(t);
        }
    }
    out
}

/// Weights `w_j` with `int_{nodes[0]}^{t} (t - tau)^{-1/2} psi(tau) dtau ~ sum_j w_j psi(nodes[j])`,
/// where `t = nodes[last]`. `degree` 2 interpolates `psi` by quadratics on
/// pairs of intervals (the last interval borrows its left neighbour when the
/// count is odd), `degree` 1 by chords.
pub fn product_weights(nodes: &[f64], degree: usize) -> Result<Vec<f64>> {
    let p = nodes.len();
    if p < 2 || nodes.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(LabError::InvalidArgument("product rule needs at least two increasing nodes".into()));
    }
    if degree != 1 && degree != 2 {
        return Err(LabError::InvalidArgument("product rule degree must be 1 or 2".into()));
    }
    let t = nodes[p - 1];
    let mut w = vec![0.0; p];
    let (gx, gw) = gauss_legendre(3);
    // int_a^b (t - tau)^{-1/2} l(tau) dtau = int 2 l(t - s^2) ds over s in [sqrt(t-b), sqrt(t-a)]
    let mut panel = |a: f64, b: f64, idx: &[usize]| {
        let (lo, hi) = ((t - b).max(0.0).sqrt(), (t - a).max(0.0).sqrt());
        let (c, r) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        for (x, wt) in gx.iter().zip(&gw) {
            let s = c + r * x;
            let tau = t - s * s;
            for &k in idx {
                let mut l = 1.0;
                for &m in idx {
                    if m != k {
                        l *= (tau - nodes[m]) / (nodes[k] - nodes[m]);
                    }
                }
                w[k] += 2.0 * r * wt * l;
            }
        }
    };
    let iv = p - 1;
    if degree == 1 || iv == 1 {
        for k in 0..iv {
            panel(nodes[k], nodes[k + 1], &[k, k + 1]);
        }
        return Ok(w);
    }
    let mut k = 0;
    while k + 2 <= iv {
        panel(nodes[k], nodes[k + 2], &[k, k + 1, k + 2]);
        k += 2;
    }
    if k < iv {
        panel(nodes[k], nodes[k + 1], &[k - 1, k, k + 1]);
    }
    Ok(w)
}
