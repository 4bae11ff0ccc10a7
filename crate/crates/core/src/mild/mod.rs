//! Mild solutions of the half-space Navier-Stokes system by successive
//! approximation: `u = e^{tA} u0 + int_0^t G(t - tau) Q div(F - u (x) u) dtau`,
//! evaluated per tangential mode with exact hat-basis weights in `x_n` and
//! product integration in time.

mod rule;
mod slab;

pub use rule::{chebyshev_nodes, graded_nodes, merge_nodes, product_weights};

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::kernels::norms::{measure_kernel_constants, TableSpec};
use crate::numerics::{Field, Grid, NodeKind, TimeSeries};
use crate::projection::{h_mode, ModeGrid, SourceTensor};
use slab::Slab;

/// Modes whose source columns stay below this fraction of the largest entry
/// are skipped.
const PRUNE: f64 = 1e-13;

/// Slab storage (in `f64` entries) kept in memory; beyond it slabs are rebuilt.
const SLAB_BUDGET: usize = 60_000_000;

/// Time-dependent forcing tensor `F_kl`.
#[derive(Clone, Debug)]
pub enum Forcing {
    Zero,
    Constant(Field),
    /// Piecewise-linear in time between frames, constant outside.
    Frames { times: Vec<f64>, fields: Vec<Field> },
}

impl Forcing {
    pub fn at(&self, t: f64) -> Option<Field> {
        match self {
            Forcing::Zero => None,
            Forcing::Constant(f) => Some(f.clone()),
            Forcing::Frames { times, fields } => {
                if t <= times[0] {
                    return Some(fields[0].clone());
                }
                for w in 0..times.len() - 1 {
                    if t <= times[w + 1] {
                        let th = (t - times[w]) / (times[w + 1] - times[w]);
                        return Some(fields[w].scaled(1.0 - th).axpy(th, &fields[w + 1]).unwrap());
                    }
                }
                fields.last().cloned()
            }
        }
    }

    pub fn sup_norm(&self) -> f64 {
        match self {
            Forcing::Zero => 0.0,
            Forcing::Constant(f) => f.max_abs(),
            Forcing::Frames { fields, .. } => fields.iter().map(Field::max_abs).fold(0.0, f64::max),
        }
    }

    fn frames(&self) -> Vec<&Field> {
        match self {
            Forcing::Zero => vec![],
            Forcing::Constant(f) => vec![f],
            Forcing::Frames { fields, .. } => fields.iter().collect(),
        }
    }
}

/// The two constants of the contraction argument: `c0` bounds the `L^1` row
/// sums of `G`, `c` those of `sqrt(t) KTilde`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelBounds {
    pub c0: f64,
    pub c: f64,
}

impl KernelBounds {
    /// Measured with [`measure_kernel_constants`] on the default table; the
    /// result is cached for the life of the process.
    pub fn measured(n: usize) -> Result<Self> {
        static CACHE: OnceLock<Mutex<HashMap<usize, KernelBounds>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        let mut guard = cache.lock().unwrap();
        if let Some(b) = guard.get(&n) {
            return Ok(*b);
        }
        let k = measure_kernel_constants(n, &TableSpec::for_dim(n))?;
        let b = KernelBounds { c0: k.c0, c: k.c };
        guard.insert(n, b);
        Ok(b)
    }

    /// Largest horizon with `8 c c0 (|u0| + |F|) sqrt(T) <= 1`.
    pub fn admissible_horizon(&self, data: f64) -> f64 {
        if data <= 0.0 {
            return f64::INFINITY;
        }
        (1.0 / (8.0 * self.c * self.c0 * data)).powi(2)
    }
}

#[derive(Clone, Debug)]
pub struct MildProblem {
    pub u0: Field,
    pub forcing: Forcing,
    /// Increasing, starting at 0; the last node is the horizon.
    pub times: Vec<f64>,
    pub tol: f64,
    pub max_iter: usize,
    pub bounds: KernelBounds,
    /// `|div u0| <= div_tol * max |d_j u0_i|`
    pub div_tol: f64,
    pub trace_tol: f64,
    /// Allowed `|D2 - D1| / |D2|` between the quadratic and chord time rules.
    pub quad_tol: f64,
    /// Recorded `C_0` of the forcing hypothesis `|t^k d_t^k F| <= C_0^{k+1} k^k`.
    pub fassum_c0: Option<f64>,
}

impl MildProblem {
    pub fn new(u0: Field, forcing: Forcing, times: Vec<f64>, bounds: KernelBounds) -> Self {
        let scale = u0.max_abs() + forcing.sup_norm();
        MildProblem {
            u0,
            forcing,
            times,
            tol: 1e-10 * scale,
            max_iter: 25,
            bounds,
            div_tol: 0.1,
            trace_tol: 1e-12 * scale.max(f64::MIN_POSITIVE),
            quad_tol: 0.5,
            fassum_c0: None,
        }
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn data_norm(&self) -> f64 {
        self.u0.max_abs() + self.forcing.sup_norm()
    }

    pub fn validate(&self) -> Result<ModeGrid> {
        let mg = ModeGrid::new(&self.u0.grid)?;
        let n = mg.n;
        if self.u0.components != n {
            return Err(LabError::ComponentMismatch { expected: n, found: self.u0.components });
        }
        if self.times.len() < 2 || self.times[0] != 0.0 || self.times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(LabError::InvalidArgument("time nodes must start at 0 and increase".into()));
        }
        if !(self.tol >= 0.0) || self.max_iter == 0 {
            return Err(LabError::InvalidArgument("need tol >= 0 and max_iter >= 1".into()));
        }
        let trace = (0..self.u0.grid.len())
            .step_by(mg.nn)
            .flat_map(|p| (0..n).map(move |c| (p, c)))
            .fold(0.0f64, |m, (p, c)| m.max(self.u0.get(p, c).abs()));
        if trace > self.trace_tol {
            return Err(LabError::DirichletTrace { trace, tol: self.trace_tol });
        }
        let div = mg.divergence(&self.u0)?.max_abs();
        let mut grad: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                grad = grad.max(mg.derivative(&self.u0, i, j).iter().fold(0.0, |m, v| m.max(v.abs())));
            }
        }
        if div > self.div_tol * grad {
            return Err(LabError::InvalidArgument(format!("u0 not divergence free: |div u0| = {div:e}, |grad u0| = {grad:e}")));
        }
        for f in self.forcing.frames() {
            f.grid.require_same(&self.u0.grid)?;
            SourceTensor::new(f.clone(), self.trace_tol.max(1e-12 * f.max_abs()))?;
        }
        Ok(mg)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PicardState {
    pub m: usize,
    pub sup_norm: f64,
    /// `|u^m - u^{m-1}|` over all nodes; absent for `m = 0`.
    pub diff_norm: Option<f64>,
    pub ratio: Option<f64>,
    /// `sup_norm <= 2 c0 (|u0| + |F|)`
    pub within_bound: bool,
    /// Difference between the quadratic and chord time rules in the last Duhamel term.
    pub quad_estimate: f64,
}

#[derive(Clone, Debug)]
pub struct MildSolution {
    pub series: TimeSeries,
    pub states: Vec<PicardState>,
    pub converged: bool,
    /// `|u - (u^0 + D[F - u (x) u])|` after the last iterate.
    pub residual: f64,
}

/// `u (x) u - F` at one time; `F` may be absent.
pub fn assemble_quadratic_source(u: &Field, f: Option<&Field>) -> Result<Field> {
    let n = u.grid.n;
    if u.components != n {
        return Err(LabError::ComponentMismatch { expected: n, found: u.components });
    }
    let mut out = Field::zeros(&u.grid, n * n);
    for p in 0..u.grid.len() {
        for k in 0..n {
            for j in 0..n {
                out.set(p, k * n + j, u.get(p, k) * u.get(p, j));
            }
        }
    }
    if let Some(f) = f {
        f.grid.require_same(&u.grid)?;
        if f.components != n * n {
            return Err(LabError::ComponentMismatch { expected: n * n, found: f.components });
        }
        out = out.axpy(-1.0, f)?;
    }
    Ok(out)
}

/// Active tangential modes of a divergence-form source `S` with the columns
/// `A` (against `G`) and `B` (against `d_{y_n} G`, tangential rows only).
struct ModeSource {
    modes: Vec<usize>,
    a: Vec<Vec<Vec<Complex64>>>,
    b: Vec<Vec<Vec<Complex64>>>,
}

fn axpy(acc: &mut [Complex64], a: Complex64, x: &[Complex64]) {
    if a.re == 0.0 && a.im == 0.0 {
        return;
    }
    for (o, v) in acc.iter_mut().zip(x) {
        *o += a * v;
    }
}

fn col_max(cols: &[Vec<Complex64>]) -> f64 {
    cols.iter().flatten().fold(0.0, |m, z| m.max(z.norm()))
}

/// `G Q div S = G A + d_{y_n} G B` after moving the normal derivative of `S_n.` onto the kernel.
fn mode_source(mg: &ModeGrid, s: &Field) -> ModeSource {
    let n = mg.n;
    let nn = mg.nn;
    let tn = n - 1;
    let hats: Vec<Vec<Complex64>> = (0..n * n).map(|c| mg.forward(s, c)).collect();
    let per: Vec<(Vec<Vec<Complex64>>, Vec<Vec<Complex64>>)> = (0..mg.modes())
        .into_par_iter()
        .map(|m| {
            let v: Vec<&[Complex64]> = hats.iter().map(|h| &h[m * nn..(m + 1) * nn]).collect();
            let mut a = h_mode(mg, m, &v);
            for j in 0..n {
                for k in 0..tn {
                    axpy(&mut a[j], mg.dmult(m, k), v[k * n + j]);
                }
                if j < tn {
                    axpy(&mut a[j], -mg.dmult(m, j), v[tn * n + tn]);
                }
            }
            for beta in 0..tn {
                let d = -mg.dmult(m, beta);
                axpy(&mut a[tn], d, v[beta * n + tn]);
                axpy(&mut a[tn], d, v[tn * n + beta]);
            }
            let b = (0..tn).map(|beta| v[tn * n + beta].iter().map(|z| -z).collect()).collect();
            (a, b)
        })
        .collect();
    let scale = per.iter().map(|(a, b)| col_max(a).max(col_max(b))).fold(0.0, f64::max);
    let mut out = ModeSource { modes: vec![], a: vec![], b: vec![] };
    if scale == 0.0 {
        return out;
    }
    for (m, (a, b)) in per.into_iter().enumerate() {
        if col_max(&a).max(col_max(&b)) > PRUNE * scale {
            out.modes.push(m);
            out.a.push(a);
            out.b.push(b);
        }
    }
    out
}

/// Semigroup and Duhamel operators on fixed time nodes, with the kernel slabs
/// for each pair `(t_i, t_j)` built on first use.
pub struct DuhamelOperator {
    pub mg: ModeGrid,
    pub times: Vec<f64>,
    w2: Vec<Vec<f64>>,
    w1: Vec<Vec<f64>>,
    cache: Mutex<(HashMap<(usize, usize), Arc<Slab>>, usize)>,
}

impl DuhamelOperator {
    pub fn new(grid: &Grid, times: &[f64]) -> Result<Self> {
        let mg = ModeGrid::new(grid)?;
        if times.len() < 2 || times[0] != 0.0 || times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(LabError::InvalidArgument("time nodes must start at 0 and increase".into()));
        }
        let mut w2 = vec![vec![]];
        let mut w1 = vec![vec![]];
        for i in 1..times.len() {
            w2.push(product_weights(&times[..=i], 2)?);
            w1.push(product_weights(&times[..=i], 1)?);
        }
        Ok(DuhamelOperator { mg, times: times.to_vec(), w2, w1, cache: Mutex::new((HashMap::new(), 0)) })
    }

    fn slab(&self, i: usize, j: usize) -> Arc<Slab> {
        if let Some(s) = self.cache.lock().unwrap().0.get(&(i, j)) {
            return s.clone();
        }
        let s = Arc::new(Slab::new(self.times[i] - self.times[j], self.mg.nn, self.mg.h));
        let size = 3 * self.mg.nn * self.mg.nn;
        let mut guard = self.cache.lock().unwrap();
        if guard.1 + size <= SLAB_BUDGET {
            guard.1 += size;
            guard.0.insert((i, j), s.clone());
        }
        s
    }

    fn to_field(&self, acc: &[Option<Vec<Vec<Complex64>>>]) -> Result<Field> {
        let n = self.mg.n;
        let nn = self.mg.nn;
        let comps = (0..n)
            .map(|c| {
                let mut data = vec![Complex64::new(0.0, 0.0); self.mg.modes() * nn];
                for (m, cols) in acc.iter().enumerate() {
                    if let Some(cols) = cols {
                        data[m * nn..(m + 1) * nn].copy_from_slice(&cols[c]);
                    }
                }
                self.mg.inverse(&data)
            })
            .collect();
        self.mg.field(comps)
    }

    /// `e^{t_i A} u0` at every node (`u0` itself at `t_0 = 0`).
    pub fn semigroup(&self, u0: &Field) -> Result<Vec<Field>> {
        let n = self.mg.n;
        let nn = self.mg.nn;
        let hats: Vec<Vec<Complex64>> = (0..n).map(|c| self.mg.forward(u0, c)).collect();
        let scale = hats.iter().flatten().fold(0.0, |m: f64, z| m.max(z.norm()));
        let active: Vec<usize> = (0..self.mg.modes())
            .filter(|&m| hats.iter().any(|h| h[m * nn..(m + 1) * nn].iter().any(|z| z.norm() > PRUNE * scale)))
            .collect();
        let mut out = vec![u0.clone()];
        let rest: Result<Vec<Field>> = (1..self.times.len())
            .into_par_iter()
            .map(|i| {
                let mut acc = vec![None; self.mg.modes()];
                if scale > 0.0 {
                    let sl = self.slab(i, 0);
                    for &m in &active {
                        let a: Vec<Vec<Complex64>> = hats.iter().map(|h| h[m * nn..(m + 1) * nn].to_vec()).collect();
                        acc[m] = Some(sl.apply(&self.mg, m, &a, None));
                    }
                }
                self.to_field(&acc)
            })
            .collect();
        out.extend(rest?);
        Ok(out)
    }

    /// `D[S](t_i) = int_0^{t_i} G(t_i - tau) Q div S(tau) dtau` from the
    /// sources at every node, with `max |D2 - D1|` between the quadratic and
    /// chord rules.
    pub fn apply(&self, sources: &[Field]) -> Result<(Vec<Field>, f64)> {
        if sources.len() != self.times.len() {
            return Err(LabError::InvalidArgument("one source per time node".into()));
        }
        let n = self.mg.n;
        let nn = self.mg.nn;
        for s in sources {
            s.grid.require_same(&self.mg.grid)?;
            if s.components != n * n {
                return Err(LabError::ComponentMismatch { expected: n * n, found: s.components });
            }
        }
        let ms: Vec<ModeSource> = sources.iter().map(|s| mode_source(&self.mg, s)).collect();
        let zero = Complex64::new(0.0, 0.0);
        let res: Result<Vec<(Field, f64)>> = (0..self.times.len())
            .into_par_iter()
            .map(|i| {
                let mut acc2: Vec<Option<Vec<Vec<Complex64>>>> = vec![None; self.mg.modes()];
                let mut acc1 = acc2.clone();
                for j in 0..i {
                    if ms[j].modes.is_empty() {
                        continue;
                    }
                    let sl = self.slab(i, j);
                    let root = (self.times[i] - self.times[j]).sqrt();
                    let (c2, c1) = (self.w2[i][j] * root, self.w1[i][j] * root);
                    for (q, &m) in ms[j].modes.iter().enumerate() {
                        let r = sl.apply(&self.mg, m, &ms[j].a[q], Some(&ms[j].b[q]));
                        for (acc, c) in [(&mut acc2, c2), (&mut acc1, c1)] {
                            let slot = acc[m].get_or_insert_with(|| vec![vec![zero; nn]; n]);
                            for (o, v) in slot.iter_mut().zip(&r) {
                                for (x, y) in o.iter_mut().zip(v) {
                                    *x += c * y;
                                }
                            }
                        }
                    }
                }
                let d2 = self.to_field(&acc2)?;
                let d1 = self.to_field(&acc1)?;
                let est = d2.max_abs_diff(&d1);
                Ok((d2, est))
            })
            .collect();
        let res = res?;
        let est = res.iter().map(|r| r.1).fold(0.0, f64::max);
        Ok((res.into_iter().map(|r| r.0).collect(), est))
    }
}

/// `e^{tA} u0` at one time `t > 0`.
pub fn semigroup_term(u0: &Field, t: f64) -> Result<Field> {
    if !(t > 0.0) {
        return Err(LabError::InvalidArgument("semigroup_term needs t > 0".into()));
    }
    let op = DuhamelOperator::new(&u0.grid, &[0.0, t])?;
    Ok(op.semigroup(u0)?.pop().unwrap())
}

/// `int_0^t G(t - tau) Q div S(tau) dtau` at the last node from sources `S` at every node.
pub fn duhamel_term(sources: &[Field], times: &[f64]) -> Result<(Field, f64)> {
    let grid = &sources.first().ok_or_else(|| LabError::InvalidArgument("no sources".into()))?.grid;
    let op = DuhamelOperator::new(grid, times)?;
    let (mut d, est) = op.apply(sources)?;
    Ok((d.pop().unwrap(), est))
}

/// Successive approximation `u^{m+1} = u^0 + D[F - u^m (x) u^m]` from `u^0 = e^{tA} u0`.
pub fn picard_solve(p: &MildProblem) -> Result<MildSolution> {
    p.validate()?;
    let data = p.data_norm();
    let admissible = p.bounds.admissible_horizon(data);
    if p.horizon() > admissible {
        return Err(LabError::Smallness { t: p.horizon(), admissible });
    }
    let op = DuhamelOperator::new(&p.u0.grid, &p.times)?;
    let u_lin = op.semigroup(&p.u0)?;
    let forcing: Vec<Option<Field>> = p.times.iter().map(|&t| p.forcing.at(t)).collect();
    let bound = 2.0 * p.bounds.c0 * data;
    let sup = |u: &[Field]| u.iter().map(Field::max_abs).fold(0.0, f64::max);
    let step = |u: &[Field]| -> Result<(Vec<Field>, f64)> {
        let mut src = Vec::with_capacity(u.len());
        for (ui, fi) in u.iter().zip(&forcing) {
            src.push(assemble_quadratic_source(ui, fi.as_ref())?.scaled(-1.0));
        }
        let (d, est) = op.apply(&src)?;
        let dmax = sup(&d);
        if est > p.quad_tol * dmax.max(p.tol) {
            return Err(LabError::Tolerance { estimate: est / dmax.max(f64::MIN_POSITIVE), tol: p.quad_tol });
        }
        let next = u_lin.iter().zip(&d).map(|(a, b)| a.axpy(1.0, b)).collect::<Result<Vec<_>>>()?;
        Ok((next, est))
    };
    let diff = |a: &[Field], b: &[Field]| a.iter().zip(b).map(|(x, y)| x.max_abs_diff(y)).fold(0.0, f64::max);
    let mut u = u_lin.clone();
    let s0 = sup(&u);
    let mut states = vec![PicardState { m: 0, sup_norm: s0, diff_norm: None, ratio: None, within_bound: s0 <= bound * (1.0 + 1e-12), quad_estimate: 0.0 }];
    let mut prev: Option<f64> = None;
    let mut bad = 0;
    let mut converged = false;
    for m in 1..=p.max_iter {
        let (next, est) = step(&u)?;
        let d = diff(&next, &u);
        let ratio = prev.filter(|&q| q > 0.0).map(|q| d / q);
        let s = sup(&next);
        states.push(PicardState { m, sup_norm: s, diff_norm: Some(d), ratio, within_bound: s <= bound * (1.0 + 1e-12), quad_estimate: est });
        u = next;
        if d <= p.tol {
            converged = true;
            break;
        }
        if ratio.map_or(false, |r| r > 0.9) {
            bad += 1;
            if bad >= 3 {
                return Err(LabError::Contraction(format!("difference ratio above 0.9 for 3 iterates, last {:.3}", ratio.unwrap())));
            }
        } else {
            bad = 0;
        }
        prev = Some(d);
    }
    let residual = diff(&step(&u)?.0, &u);
    let series = TimeSeries::new(p.times.clone(), u, NodeKind::Graded)?;
    Ok(MildSolution { series, states, converged, residual })
}

/// `eps x (a / (a + t))^{3/2} exp(-x^2 / (4 (a + t)))`: the odd heat evolution of `eps x e^{-x^2/(4a)}`.
pub fn shear_profile(eps: f64, a: f64, t: f64, x: f64) -> f64 {
    eps * x * (a / (a + t)).powf(1.5) * (-x * x / (4.0 * (a + t))).exp()
}

/// Shear data `u0 = (shear_profile(eps, a, 0, x_n), 0, ..)`.
pub fn shear_data(grid: &Grid, eps: f64, a: f64) -> Field {
    let n = grid.n;
    Field::from_fn(grid, n, |x, o| o[0] = shear_profile(eps, a, 0.0, x[n - 1]))
}

/// Divergence-free data `u_1 = d_n psi`, `u_n = -d_1 psi` from the stream function
/// `psi = x_n^2 sum_b a_b exp(-|x - c_b|^2 / (2 s_b^2))`, scaled to `max |u| = amp`.
/// The bumps sit mid-period at heights in `[1, 1.8]` with widths in `[0.35, 0.5]`.
pub fn random_divfree(grid: &Grid, bumps: usize, amp: f64, seed: u64) -> Field {
    let n = grid.n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let period = grid.shape[0] as f64 * grid.h;
    let params: Vec<(Vec<f64>, f64, f64)> = (0..bumps)
        .map(|_| {
            let mut c: Vec<f64> = (0..n - 1).map(|_| grid.origin[0] + period * rng.gen_range(0.4..0.6)).collect();
            c.push(rng.gen_range(1.0..1.8));
            (c, rng.gen_range(0.35..0.5), rng.gen_range(-1.0..1.0))
        })
        .collect();
    // psi = x_n^2 b(x): d_1 psi = x_n^2 d_1 b, d_n psi = 2 x_n b + x_n^2 d_n b
    let mut u = Field::from_fn(grid, n, |x, o| {
        let xn = x[n - 1];
        let mut b = 0.0;
        let mut db = vec![0.0; n];
        for (c, s, a) in &params {
            let r2: f64 = x.iter().zip(c).map(|(p, q)| (p - q) * (p - q)).sum();
            let e = a * (-r2 / (2.0 * s * s)).exp();
            b += e;
            for k in 0..n {
                db[k] -= e * (x[k] - c[k]) / (s * s);
            }
        }
        let d1 = xn * xn * db[0];
        let dn = 2.0 * xn * b + xn * xn * db[n - 1];
        o[0] = dn;
        o[n - 1] = -d1;
    });
    let m = u.max_abs();
    if m > 0.0 {
        u = u.scaled(amp / m);
    }
    u
}
