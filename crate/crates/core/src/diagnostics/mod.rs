//! Combinatorial lemmas in exact arithmetic, spectral time derivatives of
//! sampled solutions, and the growth envelopes and Taylor radius read off them.

mod poly;

pub use poly::PolynomialInT;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::numerics::{Field, TimeSeries};

fn binomial(k: usize, j: usize) -> PolynomialInT {
    let mut c = num_bigint::BigInt::from(1u32);
    for i in 0..j {
        c = c * (k - i) / (i + 1);
    }
    PolynomialInT::constant(num_rational::BigRational::from_integer(c))
}

/// `d_t^j (t^j f)`
fn shifted(f: &PolynomialInT, j: usize) -> PolynomialInT {
    f.mul_t_pow(j).derivative(j)
}

/// Checks `d^k(t^k f g) = sum_j C(k,j) d^j(t^j f) d^{k-j}(t^{k-j} g)
/// - k sum_j C(k-1,j) d^j(t^j f) d^{k-1-j}(t^{k-1-j} g)` exactly.
pub fn lemma_leibniz_check(f: &PolynomialInT, g: &PolynomialInT, k: usize) -> Result<bool> {
    if k == 0 {
        return Err(LabError::InvalidArgument("k >= 1".into()));
    }
    let lhs = f.mul(g).mul_t_pow(k).derivative(k);
    let mut rhs = PolynomialInT::zero();
    for j in 0..=k {
        rhs = rhs.add(&binomial(k, j).mul(&shifted(f, j)).mul(&shifted(g, k - j)));
    }
    let kk = PolynomialInT::constant(num_rational::BigRational::from_integer(k.into()));
    for j in 0..k {
        rhs = rhs.sub(&kk.mul(&binomial(k - 1, j)).mul(&shifted(f, j)).mul(&shifted(g, k - 1 - j)));
    }
    Ok(lhs == rhs)
}

/// Checks `d^k(t^j u) = k d^{k-1}(t^{j-1} u) + t d^k(t^{j-1} u)` exactly.
pub fn shift_recurrence_check(u: &PolynomialInT, j: usize, k: usize) -> Result<bool> {
    if j == 0 || k == 0 {
        return Err(LabError::InvalidArgument("j >= 1 and k >= 1".into()));
    }
    let lhs = u.mul_t_pow(j).derivative(k);
    let lower = u.mul_t_pow(j - 1);
    let kk = PolynomialInT::constant(num_rational::BigRational::from_integer(k.into()));
    let rhs = kk.mul(&lower.derivative(k - 1)).add(&lower.derivative(k).mul_t_pow(1));
    Ok(lhs == rhs)
}

fn ln_binomial(k: usize, j: usize) -> f64 {
    libm::lgamma(k as f64 + 1.0) - libm::lgamma(j as f64 + 1.0) - libm::lgamma((k - j) as f64 + 1.0)
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

/// `r_k = sum_{j=1}^{k-1} C(k,j) j^{j-2/3} (k-j)^{k-j-2/3} / k^{k-2/3}`, in log space.
pub fn lemma_sum_ratio(k: usize) -> Result<f64> {
    if k < 2 {
        return Err(LabError::InvalidArgument("k >= 2".into()));
    }
    let p = |m: usize| (m as f64 - 2.0 / 3.0) * (m as f64).ln();
    let terms: Vec<f64> = (1..k).map(|j| ln_binomial(k, j) + p(j) + p(k - j)).collect();
    Ok((log_sum_exp(&terms) - p(k)).exp())
}

/// The same sum with the factor written `(n-j)^{n-j-2/3}`, taken literally
/// for a fixed `n`: only the terms `j < n` are defined.
pub fn lemma_sum_ratio_literal(k: usize, n: usize) -> Result<f64> {
    if k < 2 || n < 2 {
        return Err(LabError::InvalidArgument("k >= 2 and n >= 2".into()));
    }
    let p = |m: usize| (m as f64 - 2.0 / 3.0) * (m as f64).ln();
    let terms: Vec<f64> = (1..k.min(n)).map(|j| ln_binomial(k, j) + p(j) + p(n - j)).collect();
    Ok((log_sum_exp(&terms) - p(k)).exp())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SumRatioSweep {
    /// `(k, r_k)` for `k = 2..=k_max`
    pub ratios: Vec<(usize, f64)>,
    pub sup_half: f64,
    pub sup_full: f64,
    /// `(sup_full - sup_half) / sup_half`
    pub rel_gap: f64,
    /// first `k` from which `r_k` is monotone
    pub monotone_from: usize,
    pub increasing_tail: bool,
}

pub fn sum_ratio_sweep(k_max: usize) -> Result<SumRatioSweep> {
    if k_max < 4 {
        return Err(LabError::InvalidArgument("k_max >= 4".into()));
    }
    let ratios: Vec<(usize, f64)> = (2..=k_max).into_par_iter().map(|k| lemma_sum_ratio(k).map(|r| (k, r))).collect::<Result<_>>()?;
    if ratios.iter().any(|(_, r)| !r.is_finite()) {
        return Err(LabError::NonFinite("sum ratio".into()));
    }
    let sup = |kk: usize| ratios.iter().filter(|(k, _)| *k <= kk).map(|r| r.1).fold(0.0, f64::max);
    let sup_half = sup(k_max / 2);
    let sup_full = sup(k_max);
    let l = ratios.len();
    let increasing_tail = ratios[l - 1].1 >= ratios[l - 2].1;
    let mut start = l - 1;
    while start > 0 && ((ratios[start].1 >= ratios[start - 1].1) == increasing_tail) {
        start -= 1;
    }
    Ok(SumRatioSweep { sup_half, sup_full, rel_gap: (sup_full - sup_half) / sup_half, monotone_from: ratios[start].0, increasing_tail, ratios })
}

/// `(d_t^k u)(t_e)` on a Chebyshev-Lobatto window for `k = 0..=k_used`.
#[derive(Clone, Debug)]
pub struct TimeDerivatives {
    pub window: (f64, f64),
    /// Evaluation times: the window centre and the centres of its two halves.
    pub t_eval: Vec<f64>,
    /// `derivs[e][k]`
    pub derivs: Vec<Vec<Field>>,
    /// `norms[e][k] = max |d_t^k u(t_eval[e])|`
    pub norms: Vec<Vec<f64>>,
    pub k_used: usize,
    /// `k_used < k_max` because the noise amplification passed [`COND_LIMIT`].
    pub truncated: bool,
    /// `sum_m |T_m^{(k)}(0)|` over the retained degrees, per order.
    pub condition: Vec<f64>,
}

impl TimeDerivatives {
    /// `v_k = max_e t_e^k |d_t^k u(t_e)|` for `k = 1..=k_used`.
    pub fn envelope_values(&self) -> Vec<f64> {
        (1..=self.k_used)
            .map(|k| self.t_eval.iter().zip(&self.norms).map(|(t, n)| t.powi(k as i32) * n[k]).fold(0.0, f64::max))
            .collect()
    }
}

/// Amplification of coefficient noise above which higher orders are dropped.
pub const COND_LIMIT: f64 = 1e12;

/// Nodes `t_j = c - r cos(pi j / (m-1))` as produced by
/// [`crate::mild::chebyshev_nodes`]; true when `times` matches them on its own range.
pub fn is_lobatto(times: &[f64]) -> bool {
    let m = times.len();
    if m < 3 {
        return false;
    }
    let (a, b) = (times[0], times[m - 1]);
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    times.iter().enumerate().all(|(j, t)| (t - (c - r * (std::f64::consts::PI * j as f64 / (m - 1) as f64).cos())).abs() <= 1e-10 * b.abs().max(r))
}

/// The snapshots of `series` at the given times (within `1e-12` relative).
pub fn select_times(series: &TimeSeries, nodes: &[f64]) -> Result<TimeSeries> {
    let mut snaps = Vec::with_capacity(nodes.len());
    for &t in nodes {
        let eps = 1e-12 * t.abs().max(1e-300);
        let i = series
            .times
            .iter()
            .position(|s| (s - t).abs() <= eps)
            .ok_or_else(|| LabError::InvalidArgument(format!("no snapshot at t = {t}")))?;
        snaps.push(series.snapshots[i].clone());
    }
    TimeSeries::new(nodes.to_vec(), snaps, crate::numerics::NodeKind::Chebyshev)
}

/// Chebyshev coefficients `c[m][e]` of the Lobatto interpolants through the
/// values `vals[j][e]` at increasing nodes `x_j = -cos(pi j / N)`.
fn lobatto_coefficients(vals: &[&[f64]]) -> Vec<Vec<f64>> {
    let count = vals.len();
    let nn = count - 1;
    let len = vals[0].len();
    (0..count)
        .map(|m| {
            let cm = if m == 0 || m == nn { 0.5 } else { 1.0 };
            let mut c = vec![0.0; len];
            for (j, v) in vals.iter().enumerate() {
                let cj = if j == 0 || j == nn { 0.5 } else { 1.0 };
                // T_m(-cos a) = (-1)^m cos(m a)
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                let w = 2.0 / nn as f64 * cj * cm * sign * (std::f64::consts::PI * (m * j % (2 * nn)) as f64 / nn as f64).cos();
                for (o, x) in c.iter_mut().zip(v.iter()) {
                    *o += w * x;
                }
            }
            c
        })
        .collect()
}

/// `sum_m c_m T_m(x)` for every entry.
fn clenshaw(c: &[Vec<f64>], x: f64) -> Vec<f64> {
    let len = c[0].len();
    let mut b1 = vec![0.0; len];
    let mut b2 = vec![0.0; len];
    for ck in c.iter().skip(1).rev() {
        for e in 0..len {
            let b0 = 2.0 * x * b1[e] - b2[e] + ck[e];
            b2[e] = b1[e];
            b1[e] = b0;
        }
    }
    (0..len).map(|e| x * b1[e] - b2[e] + c[0][e]).collect()
}

/// Coefficients of the derivative: `d_m = d_{m+2} + 2 (m+1) c_{m+1}`, `d_0` halved.
fn cheb_derivative(c: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = c.len();
    let len = c[0].len();
    let mut out = vec![vec![0.0; len]; n];
    for m in (0..n.saturating_sub(1)).rev() {
        for e in 0..len {
            let above = if m + 2 < n { out[m + 2][e] } else { 0.0 };
            out[m][e] = above + 2.0 * (m + 1) as f64 * c[m + 1][e];
        }
    }
    for v in out[0].iter_mut() {
        *v *= 0.5;
    }
    out
}

/// Relative size below which trailing Chebyshev coefficients are treated as noise.
const CHOP: f64 = 1e-13;

/// Spectral time derivatives of a series sampled at Chebyshev-Lobatto nodes
/// covering its own time range. The expansion is cut after the last
/// coefficient above `CHOP` times the largest, over all nodes at once.
pub fn estimate_time_derivatives(series: &TimeSeries, k_max: usize) -> Result<TimeDerivatives> {
    let times = &series.times;
    let count = times.len();
    if k_max == 0 || k_max > 10 {
        return Err(LabError::InvalidArgument("1 <= k_max <= 10".into()));
    }
    if count < 2 * k_max + 8 {
        return Err(LabError::InvalidArgument(format!("{count} nodes; k_max = {k_max} needs at least {}", 2 * k_max + 8)));
    }
    if !is_lobatto(times) {
        return Err(LabError::InvalidArgument("time nodes are not Chebyshev-Lobatto points of their range".into()));
    }
    let (a, b) = (times[0], times[count - 1]);
    let scale = 2.0 / (b - a);
    let vals: Vec<&[f64]> = series.snapshots.iter().map(|s| s.values.as_slice()).collect();
    let mut coef = lobatto_coefficients(&vals);
    let profile: Vec<f64> = coef.iter().map(|c| c.iter().fold(0.0f64, |m, v| m.max(v.abs()))).collect();
    let top = profile.iter().cloned().fold(0.0, f64::max);
    let degree = profile.iter().rposition(|p| *p > CHOP * top).unwrap_or(0);
    coef.truncate(degree + 1);
    // noise amplification: sum_m |T_m^{(k)}(0)| for m <= degree
    let unit: Vec<Vec<f64>> = (0..=degree).map(|m| (0..=degree).map(|q| if q == m { 1.0 } else { 0.0 }).collect()).collect();
    let mut u = unit;
    let mut condition = Vec::with_capacity(k_max + 1);
    for _ in 0..=k_max {
        condition.push(clenshaw(&u, 0.0).iter().map(|v| v.abs()).sum::<f64>());
        u = cheb_derivative(&u);
    }
    let mut k_used = k_max;
    while k_used > 1 && condition[k_used] > COND_LIMIT {
        k_used -= 1;
    }
    let grid = series.grid().clone();
    let comps = series.snapshots[0].components;
    let xs = [0.0, -0.5, 0.5];
    let mut derivs = Vec::new();
    let mut norms = Vec::new();
    for &x in &xs {
        let mut c = coef.clone();
        let mut row = Vec::new();
        for k in 0..=k_used {
            let s = scale.powi(k as i32);
            let values = clenshaw(&c, x).into_iter().map(|v| v * s).collect();
            row.push(Field::new(grid.clone(), comps, values)?);
            c = cheb_derivative(&c);
        }
        norms.push(row.iter().map(Field::max_abs).collect());
        derivs.push(row);
    }
    let c = 0.5 * (a + b);
    Ok(TimeDerivatives {
        window: (a, b),
        t_eval: xs.iter().map(|x| c + 0.5 * (b - a) * x).collect(),
        derivs,
        norms,
        k_used,
        truncated: k_used < k_max,
        condition,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnvelopeForm {
    /// `v_k <= M^{k+1} k^k`
    MkK,
    /// `v_k <= M^{k-1/2} k^{k-2/3}`
    MkMinusTwoThirds,
    /// `v_k <= M^k k^{k-1}`
    MkKMinusOne,
}

impl EnvelopeForm {
    /// `(exponent of M, exponent of k)` at order `k`.
    fn exponents(&self, k: f64) -> (f64, f64) {
        match self {
            EnvelopeForm::MkK => (k + 1.0, k),
            EnvelopeForm::MkMinusTwoThirds => (k - 0.5, k - 2.0 / 3.0),
            EnvelopeForm::MkKMinusOne => (k, k - 1.0),
        }
    }

    pub fn bound(&self, m: f64, k: usize) -> f64 {
        let (a, b) = self.exponents(k as f64);
        m.powf(a) * (k as f64).powf(b)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GrowthEnvelope {
    pub form: EnvelopeForm,
    /// `v_k` for `k = 1..`
    pub values: Vec<f64>,
    /// smallest `M` closing order `k` alone
    pub per_k: Vec<f64>,
    pub m_fit: f64,
    /// `M` fitted on `k <= K` for every prefix `K`
    pub prefix: Vec<f64>,
    pub pass: bool,
}

pub fn fit_envelope(values: &[f64], form: EnvelopeForm) -> Result<GrowthEnvelope> {
    if values.is_empty() {
        return Err(LabError::InvalidArgument("no envelope values".into()));
    }
    if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(LabError::NonFinite("envelope values must be finite and non-negative".into()));
    }
    let per_k: Vec<f64> = values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let k = (i + 1) as f64;
            let (a, b) = form.exponents(k);
            if v == 0.0 {
                0.0
            } else {
                ((v.ln() - b * k.ln()) / a).exp()
            }
        })
        .collect();
    let mut prefix = Vec::with_capacity(per_k.len());
    let mut m: f64 = 0.0;
    for p in &per_k {
        m = m.max(*p);
        prefix.push(m);
    }
    Ok(GrowthEnvelope { form, values: values.to_vec(), per_k, m_fit: m, prefix, pass: m.is_finite() })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusEstimate {
    pub delta: f64,
    /// `delta` hit the cap, so only `delta >= cap` is known.
    pub capped: bool,
    /// the last roots disagree by more than a factor 2: `delta` is a lower bound
    pub lower_bound_only: bool,
}

/// `delta = 1 / limsup (|d_k| / k!)^{1/k}` from the geometric mean of the
/// last three roots, capped at `cap`.
pub fn radius_estimate(d: &[f64], cap: f64) -> Result<RadiusEstimate> {
    if d.len() < 4 {
        return Err(LabError::InvalidArgument("need d_k for k = 0..=3 at least".into()));
    }
    if d.iter().any(|v| !v.is_finite()) {
        return Err(LabError::NonFinite("derivative".into()));
    }
    let roots: Vec<f64> = d
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, v)| {
            if *v == 0.0 {
                0.0
            } else {
                ((v.abs().ln() - libm::lgamma(k as f64 + 1.0)) / k as f64).exp()
            }
        })
        .collect();
    let last = &roots[roots.len() - 3..];
    let (lo, hi) = last.iter().fold((f64::INFINITY, 0.0f64), |(l, h), r| (l.min(*r), h.max(*r)));
    let rho = if lo == 0.0 { 0.0 } else { (last.iter().map(|r| r.ln()).sum::<f64>() / 3.0).exp() };
    let raw = if rho == 0.0 { f64::INFINITY } else { 1.0 / rho };
    let capped = raw >= cap;
    Ok(RadiusEstimate { delta: raw.min(cap), capped, lower_bound_only: lo > 0.0 && hi > 2.0 * lo })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{Grid, NodeKind};
    use num_rational::BigRational;
    use rand::SeedableRng;

    fn poly(c: &[i64]) -> PolynomialInT {
        PolynomialInT::new(c.iter().map(|&v| BigRational::from_integer(v.into())).collect())
    }

    #[test]
    fn leibniz_small_cases() {
        assert!(lemma_leibniz_check(&poly(&[1]), &poly(&[1]), 2).unwrap());
        assert!(lemma_leibniz_check(&poly(&[3, -1, 2]), &poly(&[0, 5]), 1).unwrap());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..40 {
            let f = PolynomialInT::random(&mut rng, 8);
            let g = PolynomialInT::random(&mut rng, 8);
            for k in 1..=8 {
                assert!(lemma_leibniz_check(&f, &g, k).unwrap());
            }
        }
        // a wrong sign is caught
        let f = poly(&[1, 1]);
        let lhs = f.mul(&f).mul_t_pow(2).derivative(2);
        assert_ne!(lhs, lhs.add(&poly(&[1])));
    }

    #[test]
    fn shift_recurrence_cases() {
        assert!(shift_recurrence_check(&poly(&[1]), 1, 1).unwrap());
        assert!(shift_recurrence_check(&poly(&[0, 0, 1]), 2, 3).unwrap());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        for j in 1..=6 {
            for k in 1..=6 {
                assert!(shift_recurrence_check(&PolynomialInT::random(&mut rng, 8), j, k).unwrap());
            }
        }
        assert!(shift_recurrence_check(&poly(&[1]), 0, 1).is_err());
    }

    #[test]
    fn sum_ratio_values() {
        assert!((lemma_sum_ratio(2).unwrap() - 2.0 / 2f64.powf(4.0 / 3.0)).abs() < 1e-14);
        // direct sum: 2 C(3,1) 1 2^{4/3} / 3^{7/3}
        let direct = 2.0 * 3.0 * 2f64.powf(4.0 / 3.0) / 3f64.powf(7.0 / 3.0);
        assert!((lemma_sum_ratio(3).unwrap() - direct).abs() < 1e-13);
        let k = 12;
        let direct: f64 = (1..k)
            .map(|j| {
                let c = (1..=j).fold(1.0, |c, i| c * (k - j + i) as f64 / i as f64);
                c * (j as f64).powf(j as f64 - 2.0 / 3.0) * ((k - j) as f64).powf((k - j) as f64 - 2.0 / 3.0)
            })
            .sum::<f64>()
            / (k as f64).powf(k as f64 - 2.0 / 3.0);
        assert!((lemma_sum_ratio(k).unwrap() / direct - 1.0).abs() < 1e-12);
        assert!(lemma_sum_ratio(400).unwrap().is_finite());
        assert!(lemma_sum_ratio(1).is_err());
        // the literal reading agrees when n = k
        assert!((lemma_sum_ratio_literal(7, 7).unwrap() - lemma_sum_ratio(7).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn sweep_reports_monotone_tail() {
        let s = sum_ratio_sweep(60).unwrap();
        assert_eq!(s.ratios.len(), 59);
        assert!(s.sup_full >= s.sup_half && s.monotone_from <= 60);
    }

    fn series(times: &[f64], f: impl Fn(f64) -> f64) -> TimeSeries {
        let g = Grid::new(2, vec![4, 4], vec![0.0, 0.0], 2.0 / 3.0, false).unwrap();
        let snaps = times.iter().map(|&t| Field::scalar_from_fn(&g, |x| f(t) * (1.0 + x[0]))).collect();
        TimeSeries::new(times.to_vec(), snaps, NodeKind::Chebyshev).unwrap()
    }

    #[test]
    fn spectral_derivatives_of_closed_forms() {
        let times = crate::mild::chebyshev_nodes(0.5, 1.5, 40);
        let td = estimate_time_derivatives(&series(&times, |t| (-t).exp()), 6).unwrap();
        assert_eq!(td.k_used, 6);
        for k in 0..=6 {
            for (e, t) in td.t_eval.iter().enumerate() {
                let exact = 3.0 * (-t).exp();
                let got = td.norms[e][k];
                // the centre is the best-conditioned evaluation point
                let tol = if e == 0 { 1e-6 } else { 1e-5 };
                assert!((got / exact - 1.0).abs() < tol, "k={k} t={t}: {got} {exact}");
            }
        }
        let td = estimate_time_derivatives(&series(&times, |_| 2.0), 6).unwrap();
        assert!((1..=6).all(|k| td.norms[0][k] < 1e-10));
        let times = crate::mild::chebyshev_nodes(0.5, 1.5, 17);
        let td = estimate_time_derivatives(&series(&times, |t| t * t * t), 4).unwrap();
        assert!(td.norms.iter().all(|n| n[4] < 1e-8));
        assert!(estimate_time_derivatives(&series(&times, |t| t), 8).is_err());
        let uniform: Vec<f64> = (0..30).map(|i| i as f64).collect();
        assert!(estimate_time_derivatives(&series(&uniform, |t| t), 4).is_err());
    }

    #[test]
    fn envelope_examples() {
        let v: Vec<f64> = (1..=8).map(|k| (k as f64).powi(k)).collect();
        let e = fit_envelope(&v, EnvelopeForm::MkK).unwrap();
        assert!((e.m_fit - 1.0).abs() < 1e-12);
        let v: Vec<f64> = (1..=8).map(|k| 4f64.powi(k)).collect();
        let e = fit_envelope(&v, EnvelopeForm::MkK).unwrap();
        let exact = (1..=8).map(|k| (4f64.powi(k) / (k as f64).powi(k)).powf(1.0 / (k as f64 + 1.0))).fold(0.0, f64::max);
        assert!((e.m_fit - exact).abs() < 1e-12 && e.m_fit <= 4.0);
        for form in [EnvelopeForm::MkK, EnvelopeForm::MkMinusTwoThirds, EnvelopeForm::MkKMinusOne] {
            let e = fit_envelope(&v, form).unwrap();
            for (i, x) in v.iter().enumerate() {
                assert!(*x <= form.bound(e.m_fit, i + 1) * (1.0 + 1e-12));
            }
        }
        assert!(fit_envelope(&[f64::NAN], EnvelopeForm::MkK).is_err());
    }

    #[test]
    fn radius_examples() {
        let mut fact = 1.0;
        for a in [2.0, 5.0] {
            let d: Vec<f64> = (0..=10)
                .map(|k| {
                    if k > 0 {
                        fact *= k as f64;
                    } else {
                        fact = 1.0;
                    }
                    fact * f64::powi(a, k)
                })
                .collect();
            let r = radius_estimate(&d, 100.0).unwrap();
            assert!((r.delta * a - 1.0).abs() < 0.1, "{r:?}");
        }
        let d: Vec<f64> = (0..=8).map(|k| (-1f64).powi(k) * (-1f64).exp()).collect();
        let r = radius_estimate(&d, 0.5).unwrap();
        assert!(r.capped && r.delta == 0.5);
        let r = radius_estimate(&[0.0; 6], 0.5).unwrap();
        assert!(r.capped && r.delta == 0.5);
    }
}
