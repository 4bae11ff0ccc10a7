//! `L^1_y` norms of kernels on tabulated grids, time-scaling fits and
//! pointwise envelope fits.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::fourier::{g_hat, g_hat_dyn, g_star_hat, j_exp, Mode};
use super::green::{eval_g, eval_k, QuadratureSpec};
use super::hat::ExpConv;
use super::heat::eval_gamma;
use super::laplace::Sign;
use crate::error::{LabError, Result};
use crate::projection::h_table;
use crate::numerics::quad::CompositeRule;
use crate::numerics::special::gauss1;

/// Grid used to tabulate a kernel in `y` for fixed `(t, x)`, in units of `sqrt(t)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TableSpec {
    /// Tangential period.
    pub period: f64,
    /// Tangential nodes per axis (a power of two is fastest).
    pub modes: usize,
    /// Normal spacing.
    pub h: f64,
    /// Normal depth beyond `x_n`.
    pub depth: f64,
}

impl TableSpec {
    pub fn for_dim(n: usize) -> Self {
        if n == 2 {
            TableSpec { period: 64.0, modes: 512, h: 1.0 / 8.0, depth: 32.0 }
        } else {
            TableSpec { period: 16.0, modes: 128, h: 1.0 / 8.0, depth: 12.0 }
        }
    }
}

/// Which kernel is integrated in `y`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum NormTarget {
    Gamma,
    /// `d_{y_k} Gamma(t, x - y)` summed over `k` as a Euclidean vector.
    GradGamma,
    G { i: usize, j: usize },
    Gstar { i: usize, j: usize },
    /// `d_{y_k} G_ij` for one axis `k`.
    DyG { i: usize, j: usize, k: usize },
    /// `d^2_{y_b y_c} K_ijq` with tangential `b, c`.
    D2K { i: usize, j: usize, q: usize, b: usize, c: usize, sign: Sign },
    /// The full Duhamel kernel of row `i` acting on the source entry `S_kl`:
    /// the `grad_y G` pattern plus the tabulated `d^2 K` terms.
    KTilde { i: usize, k: usize, l: usize },
}

fn tangential_modes(n: usize, m: usize, period: f64) -> Vec<Vec<f64>> {
    let freq = |k: usize| {
        let kk = if k < m / 2 { k as f64 } else { k as f64 - m as f64 };
        2.0 * PI * kk / period
    };
    if n == 2 {
        (0..m).map(|k| vec![freq(k)]).collect()
    } else {
        let mut out = Vec::with_capacity(m * m);
        for a in 0..m {
            for b in 0..m {
                out.push(vec![freq(a), freq(b)]);
            }
        }
        out
    }
}

/// Mode-space column of the target over the normal nodes `y_k = k h`.
fn column(target: &NormTarget, t: f64, mode: &Mode, xn: f64, ny: usize, h: f64) -> Result<Vec<Complex64>> {
    let y = |k: usize| k as f64 * h;
    let n = mode.n();
    let zero = Complex64::new(0.0, 0.0);
    Ok(match *target {
        NormTarget::G { i, j } => (0..ny).map(|k| g_hat(t, mode, xn, y(k), i, j)).collect(),
        NormTarget::Gstar { i, j } => (0..ny).map(|k| g_star_hat(t, mode, xn, y(k), i, j)).collect(),
        NormTarget::DyG { i, j, k: ax } => {
            if ax + 1 == n {
                (0..ny).map(|k| g_hat_dyn(t, mode, xn, y(k), i, j)).collect()
            } else {
                let f = Complex64::new(0.0, -mode.xi[ax]);
                (0..ny).map(|k| f * g_hat(t, mode, xn, y(k), i, j)).collect()
            }
        }
        NormTarget::D2K { i, j, q, b, c, sign } => {
            if b + 1 >= n || c + 1 >= n {
                return Err(LabError::InvalidArgument("second y-derivatives of K are tangential".into()));
            }
            let mult = -mode.xi[b] * mode.xi[c];
            if mode.rho == 0.0 || mult == 0.0 {
                return Ok(vec![zero; ny]);
            }
            let damp = (-t * mode.rho * mode.rho).exp();
            let cij = mode.c(i, j);
            let images: Vec<f64> = (0..ny).map(|k| gauss1(t, xn - y(k)) - gauss1(t, xn + y(k))).collect();
            let jv: Vec<f64> = if cij.norm() > 0.0 { (0..ny).map(|k| j_exp(t, mode.rho, xn, y(k))).collect() } else { vec![0.0; ny] };
            let e = ExpConv::new(mode.rho, h);
            let sg = sign.factor();
            let (a, bb) = if q + 1 == n {
                (e.potential_dz(&images, sg), e.potential_dz(&jv, sg))
            } else {
                (e.potential(&images, sg), e.potential(&jv, sg))
            };
            let fq = if q + 1 == n { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, mode.xi[q]) };
            (0..ny)
                .map(|k| {
                    let mut v = cij * bb[k];
                    if i == j {
                        v += a[k];
                    }
                    v * fq * damp * mult
                })
                .collect()
        }
        NormTarget::KTilde { i, k, l } => {
            let nn = n - 1;
            let mut acc = vec![zero; ny];
            let mut add = |t2: NormTarget, c: f64| -> Result<()> {
                for (a, v) in acc.iter_mut().zip(column(&t2, t, mode, xn, ny, h)?) {
                    *a += c * v;
                }
                Ok(())
            };
            add(NormTarget::DyG { i, j: l, k }, -1.0)?;
            if k == nn && l == nn {
                for j in 0..n {
                    add(NormTarget::DyG { i, j, k: j }, 1.0)?;
                }
            }
            if k < nn && l == nn {
                add(NormTarget::DyG { i, j: nn, k }, 1.0)?;
            }
            if k == nn && l < nn {
                add(NormTarget::DyG { i, j: nn, k: l }, 1.0)?;
            }
            for e in h_table(n).iter().filter(|e| e.k == k && e.l == l) {
                add(NormTarget::D2K { i, j: e.j, q: e.q, b: e.beta, c: e.gamma, sign: e.sign }, e.coef)?;
            }
            acc
        }
        _ => return Err(LabError::InvalidArgument("target is evaluated in physical space".into())),
    })
}

/// Measured kernel constants: `c0 = sup_x sum_j |G_ij(t; x, .)|_{L^1}` and
/// `c = sup_x sqrt(t) sum_kl |KTilde_{i,kl}(t; x, .)|_{L^1}`, both maximised
/// over rows and over log-spaced heights `x_n = 0.05 * 2^k sqrt(t)`. Both are
/// invariant under parabolic scaling, so `t = 1` is used.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelConstants {
    pub c0: f64,
    pub c: f64,
    pub heights: Vec<f64>,
    /// Row sums of `KTilde` per height (maximised over rows).
    pub k_profile: Vec<f64>,
    pub g_profile: Vec<f64>,
}

pub fn measure_kernel_constants(n: usize, table: &TableSpec) -> Result<KernelConstants> {
    let heights: Vec<f64> = (0..10).map(|k| 0.05 * 2f64.powi(k)).collect();
    let mut g_profile = Vec::new();
    let mut k_profile = Vec::new();
    for &xn in &heights {
        let mut gmax: f64 = 0.0;
        let mut kmax: f64 = 0.0;
        for i in 0..n {
            let mut g = 0.0;
            for j in 0..n {
                g += l1_norm_y(&NormTarget::G { i, j }, n, 1.0, xn, table)?;
            }
            let mut kk = 0.0;
            for k in 0..n {
                for l in 0..n {
                    kk += l1_norm_y(&NormTarget::KTilde { i, k, l }, n, 1.0, xn, table)?;
                }
            }
            gmax = gmax.max(g);
            kmax = kmax.max(kk);
        }
        g_profile.push(gmax);
        k_profile.push(kmax);
    }
    let c0 = g_profile.iter().cloned().fold(0.0, f64::max);
    let c = k_profile.iter().cloned().fold(0.0, f64::max);
    Ok(KernelConstants { c0, c, heights, k_profile, g_profile })
}

fn inverse_fft_inplace(n: usize, m: usize, data: &mut [Complex64], planner: &mut FftPlanner<f64>) {
    let fft = planner.plan_fft_inverse(m);
    if n == 2 {
        fft.process(data);
    } else {
        for row in data.chunks_mut(m) {
            fft.process(row);
        }
        let mut col = vec![Complex64::new(0.0, 0.0); m];
        for b in 0..m {
            for a in 0..m {
                col[a] = data[a * m + b];
            }
            fft.process(&mut col);
            for a in 0..m {
                data[a * m + b] = col[a];
            }
        }
    }
}

/// `|| target(t; x, .) ||_{L^1(R^n_+)}` for `x = (0', x_n)`.
pub fn l1_norm_y(target: &NormTarget, n: usize, t: f64, xn: f64, table: &TableSpec) -> Result<f64> {
    if !(n == 2 || n == 3) || !(t > 0.0) || xn < 0.0 {
        return Err(LabError::InvalidArgument("need n in {2, 3}, t > 0, x_n >= 0".into()));
    }
    let st = t.sqrt();
    match target {
        NormTarget::Gamma | NormTarget::GradGamma => {
            // whole-space integral on a tensor rule
            let r = 12.0 * st;
            let rule = CompositeRule::uniform(-r, r, 24, 10);
            let m = rule.nodes.len();
            let mut s = 0.0;
            let mut idx = vec![0usize; n];
            loop {
                let p: Vec<f64> = idx.iter().map(|&k| rule.nodes[k]).collect();
                let w: f64 = idx.iter().map(|&k| rule.weights[k]).product();
                let g = eval_gamma(t, &p, 0)?;
                s += w * if *target == NormTarget::Gamma { g } else { g * p.iter().map(|v| v * v).sum::<f64>().sqrt() / (2.0 * t) };
                let mut a = 0;
                loop {
                    idx[a] += 1;
                    if idx[a] < m {
                        break;
                    }
                    idx[a] = 0;
                    a += 1;
                    if a == n {
                        return Ok(s);
                    }
                }
            }
        }
        _ => {
            let period = table.period * st;
            let h = table.h * st;
            let ny = ((xn + table.depth * st) / h).ceil() as usize + 1;
            let m = table.modes;
            let modes = tangential_modes(n, m, period);
            let stride = modes.len();
            let mut data = vec![Complex64::new(0.0, 0.0); stride * ny];
            for (mi, xi) in modes.iter().enumerate() {
                let col = column(target, t, &Mode::new(xi), xn, ny, h)?;
                for (k, v) in col.into_iter().enumerate() {
                    data[k * stride + mi] = v;
                }
            }
            let mut planner = FftPlanner::new();
            let dd = period / m as f64;
            let cell = dd.powi(n as i32 - 1);
            let norm = 1.0 / period.powi(n as i32 - 1);
            let mut total = 0.0;
            for k in 0..ny {
                let row = &mut data[k * stride..(k + 1) * stride];
                inverse_fft_inplace(n, m, row, &mut planner);
                let s: f64 = row.iter().map(|v| v.re.abs()).sum::<f64>() * norm * cell;
                let w = if k == 0 || k + 1 == ny { 0.5 * h } else { h };
                total += w * s;
            }
            Ok(total)
        }
    }
}

/// Time derivative of order `s <= 2` of the tabulated kernel by centred
/// differences, then its `L^1_y` norm.
pub fn l1_norm_y_dt(target: &NormTarget, n: usize, t: f64, xn: f64, s: usize, table: &TableSpec) -> Result<f64> {
    if s == 0 {
        return l1_norm_y(target, n, t, xn, table);
    }
    if s > 2 {
        return Err(LabError::InvalidArgument("time derivatives beyond order 2 are out of reach".into()));
    }
    let d = DtTarget { inner: target.clone(), s };
    d.norm(n, t, xn, table)
}

struct DtTarget {
    inner: NormTarget,
    s: usize,
}

impl DtTarget {
    fn norm(&self, n: usize, t: f64, xn: f64, table: &TableSpec) -> Result<f64> {
        let st = t.sqrt();
        let period = table.period * st;
        let hy = table.h * st;
        let ny = ((xn + table.depth * st) / hy).ceil() as usize + 1;
        let m = table.modes;
        let modes = tangential_modes(n, m, period);
        let stride = modes.len();
        let dt = 1e-3 * t;
        let stencil: Vec<(f64, f64)> = if self.s == 1 {
            vec![(t + dt, 0.5 / dt), (t - dt, -0.5 / dt)]
        } else {
            vec![(t + dt, 1.0 / (dt * dt)), (t, -2.0 / (dt * dt)), (t - dt, 1.0 / (dt * dt))]
        };
        let mut data = vec![Complex64::new(0.0, 0.0); stride * ny];
        for (mi, xi) in modes.iter().enumerate() {
            let mode = Mode::new(xi);
            for &(tt, w) in &stencil {
                let col = column(&self.inner, tt, &mode, xn, ny, hy)?;
                for (k, v) in col.into_iter().enumerate() {
                    data[k * stride + mi] += v * w;
                }
            }
        }
        let mut planner = FftPlanner::new();
        let dd = period / m as f64;
        let scale = dd.powi(n as i32 - 1) / period.powi(n as i32 - 1);
        let mut total = 0.0;
        for k in 0..ny {
            let row = &mut data[k * stride..(k + 1) * stride];
            inverse_fft_inplace(n, m, row, &mut planner);
            let s: f64 = row.iter().map(|v| v.re.abs()).sum::<f64>() * scale;
            total += if k == 0 || k + 1 == ny { 0.5 * hy } else { hy } * s;
        }
        Ok(total)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TimeScan {
    pub ts: Vec<f64>,
    pub values: Vec<f64>,
    /// Least-squares slope of `log value` against `log t`.
    pub slope: f64,
}

pub fn loglog_slope(ts: &[f64], vs: &[f64]) -> f64 {
    let xs: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = vs.iter().map(|v| v.ln()).collect();
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Norms at `t in ts` (default `{1, 1/2, 1/4, 1/8}`) and the fitted slope.
pub fn scan_t(target: &NormTarget, n: usize, xn: f64, ts: Option<&[f64]>, table: &TableSpec) -> Result<TimeScan> {
    let ts: Vec<f64> = ts.map(|v| v.to_vec()).unwrap_or_else(|| vec![1.0, 0.5, 0.25, 0.125]);
    let values = ts.iter().map(|&t| l1_norm_y(target, n, t, xn, table)).collect::<Result<Vec<_>>>()?;
    let slope = loglog_slope(&ts, &values);
    Ok(TimeScan { ts, values, slope })
}

/// Result of a pointwise envelope fit over random samples.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnvelopeFit {
    pub big_c: f64,
    /// Gaussian decay rate in `y_n^2 / t` (G* only).
    pub c_fit: Option<f64>,
    pub samples: usize,
    /// Samples whose kernel value was exactly zero and carried no information.
    pub skipped: usize,
    /// Root-mean-square residual of the log-linear fit.
    pub residual_rms: f64,
    /// Largest `value / envelope` over the samples; at most 1 by construction.
    pub max_ratio: f64,
}

#[derive(Clone, Debug)]
pub struct EnvelopeSample {
    pub t: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub value: f64,
}

/// Random points in `t in [0.05, 1]`, `x_n, y_n in (0, 2]`, tangential offsets in `[-1, 1]`.
pub fn random_points(n: usize, count: usize, seed: u64) -> Vec<(f64, Vec<f64>, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let t = rng.gen_range(0.05..1.0);
            let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect();
            let mut y: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect();
            x[n - 1] = rng.gen_range(0.02..2.0);
            y[n - 1] = rng.gen_range(0.02..2.0);
            (t, x, y)
        })
        .collect()
}

/// `|G*_ij| <= C (|x - y*|^2 + t)^{-n/2} e^{-c y_n^2 / t}`: `c` from a
/// least-squares fit, `C` the smallest constant covering every sample.
pub fn fit_gstar_envelope(samples: &[EnvelopeSample]) -> Result<EnvelopeFit> {
    let mut pts = Vec::new();
    let mut skipped = 0;
    for s in samples {
        let n = s.x.len();
        let mut d2 = 0.0;
        for k in 0..n {
            let yk = if k + 1 == n { -s.y[k] } else { s.y[k] };
            d2 += (s.x[k] - yk).powi(2);
        }
        let a = s.value.abs();
        if a == 0.0 {
            skipped += 1;
            continue;
        }
        let lhs = (a * (d2 + s.t).powf(0.5 * n as f64)).ln();
        pts.push((s.y[n - 1].powi(2) / s.t, lhs));
    }
    if pts.len() < 3 {
        return Err(LabError::InvalidArgument("too few informative samples".into()));
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = sxy / sxx;
    let c = -slope;
    let icpt = my - slope * mx;
    let residual_rms = (pts.iter().map(|p| (p.1 - icpt - slope * p.0).powi(2)).sum::<f64>() / m).sqrt();
    let log_c = pts.iter().map(|p| p.1 - slope * p.0).fold(f64::NEG_INFINITY, f64::max);
    let big_c = log_c.exp();
    let max_ratio = pts.iter().map(|p| (p.1 - slope * p.0 - log_c).exp()).fold(0.0, f64::max);
    Ok(EnvelopeFit { big_c, c_fit: Some(c), samples: samples.len(), skipped, residual_rms, max_ratio })
}

/// `|K| <= C (|x - y|^2 + t)^{-(n-1)/2}` with `C` the largest sample ratio.
pub fn fit_k_envelope(samples: &[EnvelopeSample]) -> Result<EnvelopeFit> {
    if samples.is_empty() {
        return Err(LabError::InvalidArgument("no samples".into()));
    }
    let mut logs = Vec::new();
    for s in samples {
        let n = s.x.len();
        let d2: f64 = s.x.iter().zip(&s.y).map(|(a, b)| (a - b).powi(2)).sum();
        let r = s.value.abs() * (d2 + s.t).powf(0.5 * (n as f64 - 1.0));
        logs.push(r);
    }
    let big_c = logs.iter().cloned().fold(0.0, f64::max);
    let skipped = logs.iter().filter(|v| **v == 0.0).count();
    let lg: Vec<f64> = logs.iter().filter(|v| **v > 0.0).map(|v| v.ln()).collect();
    let mean = lg.iter().sum::<f64>() / lg.len().max(1) as f64;
    let residual_rms = (lg.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / lg.len().max(1) as f64).sqrt();
    let max_ratio = if big_c > 0.0 { 1.0 } else { 0.0 };
    Ok(EnvelopeFit { big_c, c_fit: None, samples: samples.len(), skipped, residual_rms, max_ratio })
}

/// Samples `G*_ij` (zero-based indices) at random points.
pub fn sample_gstar(n: usize, i: usize, j: usize, count: usize, seed: u64, spec: &QuadratureSpec) -> Result<Vec<EnvelopeSample>> {
    random_points(n, count, seed)
        .into_iter()
        .map(|(t, x, y)| {
            let (_, s) = eval_g(t, &x, &y, i, j, spec)?;
            Ok(EnvelopeSample { t, x, y, value: s })
        })
        .collect()
}

/// Samples `K_ijq` at random points.
#[allow(clippy::too_many_arguments)]
pub fn sample_k(n: usize, i: usize, j: usize, q: usize, sign: Sign, count: usize, seed: u64, spec: &QuadratureSpec) -> Result<Vec<EnvelopeSample>> {
    random_points(n, count, seed)
        .into_iter()
        .map(|(t, x, y)| {
            let (v, _) = eval_k(t, &x, &y, i, j, q, sign, spec)?;
            Ok(EnvelopeSample { t, x, y, value: v })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::heat::grad_gamma_l1;

    #[test]
    fn heat_kernel_norms() {
        let tb = TableSpec::for_dim(2);
        for t in [1e-2, 1.0, 10.0] {
            let v = l1_norm_y(&NormTarget::Gamma, 2, t, 0.5, &tb).unwrap();
            assert!((v - 1.0).abs() < 1e-10);
        }
        let s = scan_t(&NormTarget::GradGamma, 2, 0.5, None, &tb).unwrap();
        assert!((s.slope + 0.5).abs() < 1e-8);
        assert!((s.values[0] - grad_gamma_l1(1.0, 2)).abs() < 1e-6 * s.values[0]);
    }

    #[test]
    fn tabulated_images_kernel_norm() {
        // G_nn has no correction: its norm is int |Gamma(x-y) - Gamma(x-y*)| over the half plane,
        // which is the mass of the odd extension, erf(x_n / (2 sqrt t)) in 1-D times 1.
        let tb = TableSpec::for_dim(2);
        for xn in [0.3, 1.0] {
            let v = l1_norm_y(&NormTarget::G { i: 1, j: 1 }, 2, 1.0, xn, &tb).unwrap();
            let exact = libm::erf(xn / 2.0);
            assert!((v - exact).abs() < 2e-3, "{xn}: {v} {exact}");
        }
    }

    #[test]
    fn time_derivative_norm_of_images_kernel() {
        let tb = TableSpec { period: 32.0, modes: 256, h: 1.0 / 16.0, depth: 16.0 };
        let a = l1_norm_y_dt(&NormTarget::G { i: 1, j: 1 }, 2, 1.0, 1.0, 1, &tb).unwrap();
        let h = 1e-3;
        let p = l1_norm_y(&NormTarget::G { i: 1, j: 1 }, 2, 1.0 + h, 1.0, &tb).unwrap();
        let m = l1_norm_y(&NormTarget::G { i: 1, j: 1 }, 2, 1.0 - h, 1.0, &tb).unwrap();
        // the norm of the derivative bounds the derivative of the norm
        assert!(a + 1e-6 >= ((p - m) / (2.0 * h)).abs());
        assert!(l1_norm_y_dt(&NormTarget::G { i: 1, j: 1 }, 2, 1.0, 1.0, 3, &tb).is_err());
    }

    #[test]
    #[ignore]
    fn print_kernel_constants() {
        let t0 = std::time::Instant::now();
        let k = measure_kernel_constants(2, &TableSpec::for_dim(2)).unwrap();
        eprintln!("{k:?} {:?}", t0.elapsed());
    }

    #[test]
    fn k_second_derivative_rejects_normal_axis() {
        let tb = TableSpec { period: 16.0, modes: 64, h: 0.25, depth: 4.0 };
        let tgt = NormTarget::D2K { i: 0, j: 0, q: 0, b: 1, c: 0, sign: Sign::Plus };
        assert!(l1_norm_y(&tgt, 2, 1.0, 1.0, &tb).is_err());
    }

    #[test]
    fn envelope_fit_covers_samples() {
        let samples: Vec<EnvelopeSample> = random_points(2, 40, 3)
            .into_iter()
            .map(|(t, x, y)| {
                let d2 = (x[0] - y[0]).powi(2) + (x[1] + y[1]).powi(2);
                let v = 0.7 * (d2 + t).powi(-1) * (-0.3 * y[1] * y[1] / t).exp();
                EnvelopeSample { t, x, y, value: v }
            })
            .collect();
        let f = fit_gstar_envelope(&samples).unwrap();
        assert!((f.c_fit.unwrap() - 0.3).abs() < 1e-9);
        assert!((f.big_c - 0.7).abs() < 1e-9);
        assert!(f.max_ratio <= 1.0 + 1e-12);
    }
}
