//! Half-space Helmholtz decomposition `f = grad Phi + Q f` and the
//! divergence-form projection `Q(div F) = div F'`, evaluated mode by mode in
//! the tangential variables with exact layer potentials of piecewise-linear
//! normal profiles.

mod coeffs;
mod modes;

pub use coeffs::{h_table, HTerm};
pub use modes::{halfspace_grid, ModeGrid};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::kernels::hat::{dirichlet_potential_zero, ExpConv};
use crate::kernels::Sign;
use crate::numerics::{Field, Grid};

/// Relative size of the data on the top face above which the box is judged
/// too shallow for the compact-support assumption.
pub const SUPPORT_TOL: f64 = 1e-3;

/// A tensor field `F_kl` (component `k n + l`) on a half-space grid whose
/// rows `F_n.` vanish on `x_n = 0`.
#[derive(Clone, Debug)]
pub struct SourceTensor {
    pub f: Field,
    pub boundary_tol: f64,
}

impl SourceTensor {
    pub fn new(f: Field, boundary_tol: f64) -> Result<Self> {
        let n = f.grid.n;
        if f.components != n * n {
            return Err(LabError::ComponentMismatch { expected: n * n, found: f.components });
        }
        if !f.grid.halfspace {
            return Err(LabError::InvalidArgument("source tensors live on half-space grids".into()));
        }
        let nn = f.grid.shape[n - 1];
        let mut worst: f64 = 0.0;
        for p in (0..f.grid.len()).step_by(nn) {
            for m in 0..n {
                worst = worst.max(f.get(p, (n - 1) * n + m).abs());
            }
        }
        if worst > boundary_tol {
            return Err(LabError::BoundaryFlag(format!("max |F_nm| on x_n = 0 is {worst:e}, tolerance {boundary_tol:e}")));
        }
        Ok(SourceTensor { f, boundary_tol })
    }
}

#[derive(Clone, Debug)]
pub struct Helmholtz {
    pub phi: Field,
    pub grad_phi: Field,
    pub qf: Field,
}

fn check_support(mg: &ModeGrid, f: &Field) -> Result<()> {
    let scale = f.max_abs();
    if scale == 0.0 {
        return Ok(());
    }
    let nn = mg.nn;
    let mut top: f64 = 0.0;
    for col in 0..f.grid.len() / nn {
        for c in 0..f.components {
            top = top.max(f.get(col * nn + nn - 1, c).abs());
        }
    }
    if top > SUPPORT_TOL * scale {
        return Err(LabError::Tolerance { estimate: top / scale, tol: SUPPORT_TOL });
    }
    Ok(())
}

fn split(v: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
    (v.iter().map(|z| z.re).collect(), v.iter().map(|z| z.im).collect())
}

fn join(re: Vec<f64>, im: Vec<f64>) -> Vec<Complex64> {
    re.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)).collect()
}

/// Layer potentials of one complex column for a mode with `rho > 0`.
struct Column<'a> {
    conv: ExpConv,
    v: &'a [Complex64],
}

impl Column<'_> {
    /// `int N^±^ v`
    fn pot(&self, sign: Sign) -> Vec<Complex64> {
        let (re, im) = split(self.v);
        join(self.conv.potential(&re, sign.factor()), self.conv.potential(&im, sign.factor()))
    }

    /// `int d_x N^±^ v`
    fn pot_dx(&self, sign: Sign) -> Vec<Complex64> {
        let (re, im) = split(self.v);
        join(self.conv.potential_dx(&re, sign.factor()), self.conv.potential_dx(&im, sign.factor()))
    }

    /// `d_x int d_x N^-^ v = v + rho^2 int N^-^ v`
    fn pot_dxx_minus(&self) -> Vec<Complex64> {
        let r2 = self.conv.rho * self.conv.rho;
        self.pot(Sign::Minus).into_iter().zip(self.v).map(|(p, v)| v + r2 * p).collect()
    }
}

fn axpy(acc: &mut [Complex64], a: Complex64, x: &[Complex64]) {
    for (o, v) in acc.iter_mut().zip(x) {
        *o += a * v;
    }
}

/// Runs `per_mode(m, columns) -> output columns` over all tangential modes and
/// transforms the results back.
fn map_modes<F>(mg: &ModeGrid, f: &Field, outputs: usize, per_mode: F) -> Vec<Vec<f64>>
where
    F: Fn(usize, &[&[Complex64]]) -> Vec<Vec<Complex64>> + Sync,
{
    let nn = mg.nn;
    let hats: Vec<Vec<Complex64>> = (0..f.components).map(|c| mg.forward(f, c)).collect();
    let cols: Vec<Vec<Vec<Complex64>>> = (0..mg.modes())
        .into_par_iter()
        .map(|m| {
            let inputs: Vec<&[Complex64]> = hats.iter().map(|h| &h[m * nn..(m + 1) * nn]).collect();
            per_mode(m, &inputs)
        })
        .collect();
    let mut comps = Vec::with_capacity(outputs);
    for c in 0..outputs {
        let mut data = vec![Complex64::new(0.0, 0.0); mg.modes() * nn];
        for (m, col) in cols.iter().enumerate() {
            data[m * nn..(m + 1) * nn].copy_from_slice(&col[c]);
        }
        comps.push(mg.inverse(&data));
    }
    comps
}

/// `Phi = -int grad_y N . f dy`, `grad Phi`, and `Q f = f - grad Phi`.
pub fn helmholtz_decompose(f: &Field) -> Result<Helmholtz> {
    let mg = ModeGrid::new(&f.grid)?;
    let n = mg.n;
    let nn = n - 1;
    if f.components != n {
        return Err(LabError::ComponentMismatch { expected: n, found: f.components });
    }
    check_support(&mg, f)?;
    let h = mg.h;
    let zero = Complex64::new(0.0, 0.0);
    // outputs: Phi, then grad Phi
    let out = map_modes(&mg, f, n + 1, |m, v| {
        let len = mg.nn;
        let mut res = vec![vec![zero; len]; n + 1];
        let rho = mg.xis[m].iter().map(|x| x * x).sum::<f64>().sqrt();
        if m == 0 || rho == 0.0 {
            // only int d_x N^- f_n survives; d_n of it is f_n
            let (re, im) = split(v[nn]);
            let (_, dr) = dirichlet_potential_zero(&re, h);
            let (_, di) = dirichlet_potential_zero(&im, h);
            res[0] = join(dr, di);
            res[n] = v[nn].to_vec();
            return res;
        }
        let conv = ExpConv::new(rho, h);
        let normal = Column { conv, v: v[nn] };
        // int d_{y_g} N f_g = -P+_g f_g and int d_{y_n} N f_n = -P-_n f_n
        let mut phi = normal.pot_dx(Sign::Minus);
        let mut dn = normal.pot_dxx_minus();
        for g in 0..nn {
            let col = Column { conv, v: v[g] };
            let d = mg.dmult(m, g);
            axpy(&mut phi, d, &col.pot(Sign::Plus));
            axpy(&mut dn, d, &col.pot_dx(Sign::Plus));
        }
        for g in 0..nn {
            let d = mg.dmult(m, g);
            res[1 + g] = phi.iter().map(|p| d * p).collect();
        }
        res[0] = phi;
        res[n] = dn;
        res
    });
    let mut out = out.into_iter();
    let phi = Field::new(f.grid.clone(), 1, out.next().unwrap())?;
    let grad_phi = Field::from_components(&f.grid, &out.collect::<Vec<_>>())?;
    let qf = f.axpy(-1.0, &grad_phi)?;
    Ok(Helmholtz { phi, grad_phi, qf })
}

/// `F'` from the componentwise formulas: row `n` is algebraic, rows `beta < n`
/// add `d_m Phi_beta` with
/// `Phi_beta = -sum_{q<n} P+_q F_bq - P-_n (F_bn + F_nb) + P+_b F_nn`, where
/// `P±_q g = int d_{x_q} N^± g dy`.
pub fn project_f(src: &SourceTensor) -> Result<Field> {
    let f = &src.f;
    let mg = ModeGrid::new(&f.grid)?;
    let n = mg.n;
    let nn = n - 1;
    check_support(&mg, f)?;
    let h = mg.h;
    let zero = Complex64::new(0.0, 0.0);
    let idx = |k: usize, l: usize| k * n + l;
    let rows = map_modes(&mg, f, nn * n, |m, v| {
        let len = mg.nn;
        let mut res = vec![vec![zero; len]; nn * n];
        let sym: Vec<Vec<Complex64>> = (0..nn).map(|b| v[idx(b, nn)].iter().zip(v[idx(nn, b)]).map(|(a, c)| a + c).collect()).collect();
        let rho = mg.xis[m].iter().map(|x| x * x).sum::<f64>().sqrt();
        for b in 0..nn {
            for mm in 0..n {
                let mut col = v[idx(b, mm)].to_vec();
                if mm == b {
                    axpy(&mut col, Complex64::new(-1.0, 0.0), v[idx(nn, nn)]);
                }
                res[b * n + mm] = col;
            }
        }
        if m == 0 || rho == 0.0 {
            for b in 0..nn {
                axpy(&mut res[b * n + nn], Complex64::new(-1.0, 0.0), &sym[b]);
            }
            return res;
        }
        let conv = ExpConv::new(rho, h);
        let fnn = Column { conv, v: v[idx(nn, nn)] };
        let (fnn_pot, fnn_dx) = (fnn.pot(Sign::Plus), fnn.pot_dx(Sign::Plus));
        for b in 0..nn {
            let s = Column { conv, v: &sym[b] };
            let mut phi: Vec<Complex64> = s.pot_dx(Sign::Minus).iter().map(|z| -z).collect();
            let mut dphi: Vec<Complex64> = s.pot_dxx_minus().iter().map(|z| -z).collect();
            for q in 0..nn {
                let c = Column { conv, v: v[idx(b, q)] };
                let d = -mg.dmult(m, q);
                axpy(&mut phi, d, &c.pot(Sign::Plus));
                axpy(&mut dphi, d, &c.pot_dx(Sign::Plus));
            }
            let d = mg.dmult(m, b);
            axpy(&mut phi, d, &fnn_pot);
            axpy(&mut dphi, d, &fnn_dx);
            for g in 0..nn {
                axpy(&mut res[b * n + g], mg.dmult(m, g), &phi);
            }
            axpy(&mut res[b * n + nn], Complex64::new(1.0, 0.0), &dphi);
        }
        res
    });
    let mut comps = rows;
    for mm in 0..n {
        let mut row = f.component(idx(nn, mm));
        if mm == nn {
            row.iter_mut().for_each(|x| *x = 0.0);
        }
        comps.push(row);
    }
    Field::from_components(&f.grid, &comps)
}

/// The nonlocal part `h` of `div F'`, assembled from [`h_table`].
pub fn compute_h(src: &SourceTensor) -> Result<Field> {
    let f = &src.f;
    let mg = ModeGrid::new(&f.grid)?;
    let n = mg.n;
    check_support(&mg, f)?;
    let comps = map_modes(&mg, f, n, |m, v| h_mode(&mg, m, v));
    mg.field(comps)
}

/// `h` for one tangential mode, from the transformed columns of `F_kl`.
pub(crate) fn h_mode(mg: &ModeGrid, m: usize, v: &[&[Complex64]]) -> Vec<Vec<Complex64>> {
    let n = mg.n;
    let zero = Complex64::new(0.0, 0.0);
    let mut res = vec![vec![zero; mg.nn]; n];
    let rho = mg.xis[m].iter().map(|x| x * x).sum::<f64>().sqrt();
    // every term carries two tangential derivatives
    if m == 0 || rho == 0.0 {
        return res;
    }
    let conv = ExpConv::new(rho, mg.h);
    let mut cache: std::collections::HashMap<(usize, usize, usize, bool), Vec<Complex64>> = Default::default();
    for t in h_table(n) {
        let a = t.coef * mg.dmult(m, t.beta) * mg.dmult(m, t.gamma);
        if a == zero {
            continue;
        }
        let key = (t.k, t.l, t.q, t.sign == Sign::Minus);
        let p = cache.entry(key).or_insert_with(|| {
            let c = Column { conv, v: v[t.k * n + t.l] };
            if t.q + 1 == n {
                c.pot_dx(t.sign)
            } else {
                let d = mg.dmult(m, t.q);
                c.pot(t.sign).into_iter().map(|z| d * z).collect()
            }
        });
        axpy(&mut res[t.j], a, p);
    }
    res
}

/// The local part of `div F'`:
/// `sum_k d_k F_kj - d_j F_nn - delta_nj sum_b d_b (F_bn + F_nb)`.
pub fn local_terms(mg: &ModeGrid, f: &Field) -> Result<Field> {
    let n = mg.n;
    let nn = n - 1;
    let len = f.grid.len();
    let mut comps = vec![vec![0.0; len]; n];
    let div = mg.divergence(f)?;
    for j in 0..n {
        comps[j] = div.component(j);
        for (o, d) in comps[j].iter_mut().zip(mg.derivative(f, nn * n + nn, j)) {
            *o -= d;
        }
    }
    for b in 0..nn {
        for c in [b * n + nn, nn * n + b] {
            for (o, d) in comps[nn].iter_mut().zip(mg.derivative(f, c, b)) {
                *o -= d;
            }
        }
    }
    Field::from_components(&f.grid, &comps)
}

#[derive(Clone, Debug, Serialize)]
pub struct ProjectionReport {
    /// `|div F' - Q(div F)|_2 / |div F|_2`
    pub identity_residual: f64,
    /// `|div F' - local - h|_2 / |div F|_2`
    pub h_residual: f64,
    /// `max |div Q(div F)| / max |div F|`
    pub div_q: f64,
    /// `max |(Q div F)_n|` on `x_n = 0`, relative to `max |div F|`
    pub normal_trace: f64,
    pub fprime_max: f64,
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Projects `F` and checks it against the Helmholtz route and the `h` table.
pub fn projection_report(src: &SourceTensor) -> Result<(Field, ProjectionReport)> {
    let f = &src.f;
    let mg = ModeGrid::new(&f.grid)?;
    let n = mg.n;
    let fp = project_f(src)?;
    let div_fp = mg.divergence(&fp)?;
    let div_f = mg.divergence(f)?;
    let hz = helmholtz_decompose(&div_f)?;
    let h = compute_h(src)?;
    let local = local_terms(&mg, f)?;
    let scale = l2(&div_f.values).max(f64::MIN_POSITIVE);
    let diff: Vec<f64> = div_fp.values.iter().zip(&hz.qf.values).map(|(a, b)| a - b).collect();
    let hdiff: Vec<f64> = (0..div_fp.values.len()).map(|i| div_fp.values[i] - local.values[i] - h.values[i]).collect();
    let fmax = div_f.max_abs().max(f64::MIN_POSITIVE);
    let divq = mg.divergence(&hz.qf)?;
    let nn = mg.nn;
    let trace = (0..f.grid.len()).step_by(nn).fold(0.0f64, |m, p| m.max(hz.qf.get(p, n - 1).abs()));
    let report = ProjectionReport {
        identity_residual: l2(&diff) / scale,
        h_residual: l2(&hdiff) / scale,
        div_q: divq.max_abs() / fmax,
        normal_trace: trace / fmax,
        fprime_max: fp.max_abs(),
    };
    Ok((fp, report))
}

/// Gaussian-windowed random tensor field with `bumps` bumps per component,
/// centred in the middle of the tangential period at heights in `[0.6, 1.6]`.
/// Row `n` carries an extra factor `x_n` so that it vanishes on the boundary.
pub fn random_admissible(grid: &Grid, bumps: usize, seed: u64) -> Field {
    let n = grid.n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let period = grid.shape[0] as f64 * grid.h;
    let params: Vec<Vec<(Vec<f64>, f64, f64)>> = (0..n * n)
        .map(|_| {
            (0..bumps)
                .map(|_| {
                    let mut c: Vec<f64> = (0..n - 1).map(|_| grid.origin[0] + period * rng.gen_range(0.35..0.65)).collect();
                    c.push(rng.gen_range(0.6..1.6));
                    (c, rng.gen_range(0.2..0.35), rng.gen_range(-1.0..1.0))
                })
                .collect()
        })
        .collect();
    Field::from_fn(grid, n * n, |x, out| {
        for (c, o) in out.iter_mut().enumerate() {
            let mut v = 0.0;
            for (centre, s, a) in &params[c] {
                let r2: f64 = x.iter().zip(centre).map(|(p, q)| (p - q) * (p - q)).sum();
                v += a * (-r2 / (2.0 * s * s)).exp();
            }
            if c / n == n - 1 {
                v *= x[n - 1];
            }
            *o = v;
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid2(h: f64, period: f64, depth: f64) -> Grid {
        halfspace_grid(2, (period / h).round() as usize, (depth / h).round() as usize + 1, h).unwrap()
    }

    #[test]
    fn gradient_fields_project_to_zero() {
        let g = grid2(1.0 / 64.0, 4.0, 4.0);
        let bump = |x: &[f64]| (-((x[0] - 2.0).powi(2) + (x[1] - 1.0).powi(2)) / (2.0 * 0.09)).exp();
        let f = Field::from_fn(&g, 2, |x, o| {
            let b = bump(x);
            o[0] = -(x[0] - 2.0) / 0.09 * b;
            o[1] = -(x[1] - 1.0) / 0.09 * b;
        });
        let d = helmholtz_decompose(&f).unwrap();
        let r = d.qf.max_abs() / f.max_abs();
        assert!(r <= 1e-3, "{r}");
        // Phi recovers the potential itself
        let e = (0..g.len()).fold(0.0f64, |m, p| m.max((d.phi.values[p] - bump(&g.position(p))).abs()));
        assert!(e < 1e-3, "{e}");
    }

    #[test]
    fn shear_field_has_no_gradient_part() {
        let g = grid2(1.0 / 32.0, 2.0, 6.0);
        let f = Field::from_fn(&g, 2, |x, o| o[0] = x[1] * (-x[1] * x[1]).exp());
        let d = helmholtz_decompose(&f).unwrap();
        assert!(d.grad_phi.max_abs() < 1e-12);
        assert!(d.qf.max_abs_diff(&f) < 1e-12);
        let z = helmholtz_decompose(&Field::zeros(&g, 2)).unwrap();
        assert_eq!(z.qf.max_abs(), 0.0);
        assert_eq!(z.grad_phi.max_abs(), 0.0);
    }

    #[test]
    fn solenoidal_part_is_divergence_free_with_zero_normal_trace() {
        for n in [2, 3] {
            let h = if n == 2 { 1.0 / 32.0 } else { 1.0 / 8.0 };
            let g = halfspace_grid(n, (4.0 / h) as usize, (4.0 / h) as usize + 1, h).unwrap();
            let f = Field::from_fn(&g, n, |x, o| {
                let r2: f64 = x[..n - 1].iter().map(|p| (p - 2.0) * (p - 2.0)).sum::<f64>() + (x[n - 1] - 1.2).powi(2);
                let b = (-r2 / 0.18).exp();
                for (c, v) in o.iter_mut().enumerate() {
                    *v = b * (1.0 + c as f64 + x[0]);
                }
            });
            let d = helmholtz_decompose(&f).unwrap();
            assert!(d.grad_phi.axpy(1.0, &d.qf).unwrap().max_abs_diff(&f) < 1e-14);
            let mg = ModeGrid::new(&g).unwrap();
            let div = mg.divergence(&d.qf).unwrap();
            let scale = mg.divergence(&f).unwrap().max_abs();
            let tol = if n == 2 { 2e-2 } else { 5e-2 };
            assert!(div.max_abs() < tol * scale, "n = {n}: {} vs {scale}", div.max_abs());
            let nn = mg.nn;
            let trace = (0..g.len()).step_by(nn).fold(0.0f64, |m, p| m.max(d.qf.get(p, n - 1).abs()));
            assert!(trace < 1e-12 * f.max_abs(), "{trace}");
        }
    }

    #[test]
    fn fnn_only_gives_zero_normal_row() {
        let g = grid2(1.0 / 16.0, 4.0, 4.0);
        let f = Field::from_fn(&g, 4, |x, o| o[3] = x[1] * (-((x[0] - 2.0).powi(2) + (x[1] - 1.0).powi(2)) / 0.1).exp());
        let fp = project_f(&SourceTensor::new(f, 1e-12).unwrap()).unwrap();
        assert!(fp.component(2).iter().chain(&fp.component(3)).all(|v| *v == 0.0));
        let z = project_f(&SourceTensor::new(Field::zeros(&g, 4), 0.0).unwrap()).unwrap();
        assert_eq!(z.max_abs(), 0.0);
        assert_eq!(compute_h(&SourceTensor::new(Field::zeros(&g, 4), 0.0).unwrap()).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn boundary_flag_is_enforced() {
        let g = grid2(1.0 / 8.0, 2.0, 3.0);
        let f = Field::from_fn(&g, 4, |x, o| o[2] = (-(x[0] - 1.0).powi(2)).exp());
        assert!(matches!(SourceTensor::new(f, 1e-10), Err(LabError::BoundaryFlag(_))));
    }

    #[test]
    fn projection_is_linear() {
        let g = grid2(1.0 / 16.0, 4.0, 4.0);
        let a = random_admissible(&g, 2, 1);
        let b = random_admissible(&g, 2, 2);
        let pa = project_f(&SourceTensor::new(a.clone(), 1e-12).unwrap()).unwrap();
        let pb = project_f(&SourceTensor::new(b.clone(), 1e-12).unwrap()).unwrap();
        let c = a.scaled(1.5).axpy(-0.25, &b).unwrap();
        let pc = project_f(&SourceTensor::new(c, 1e-12).unwrap()).unwrap();
        let expect = pa.scaled(1.5).axpy(-0.25, &pb).unwrap();
        assert!(pc.max_abs_diff(&expect) < 1e-12 * (1.0 + pc.max_abs()));
    }

    #[test]
    fn divergence_identity_and_h_table_hold() {
        let g = grid2(1.0 / 64.0, 4.0, 4.0);
        for seed in [3, 4] {
            let f = random_admissible(&g, 3, seed);
            let (_, r) = projection_report(&SourceTensor::new(f, 1e-12).unwrap()).unwrap();
            assert!(r.identity_residual <= 2e-2, "{r:?}");
            assert!(r.h_residual <= 1e-10, "{r:?}");
            assert!(r.normal_trace < 1e-10, "{r:?}");
        }
    }

    #[test]
    fn divergence_identity_in_three_dimensions() {
        let g = halfspace_grid(3, 32, 33, 1.0 / 8.0).unwrap();
        let f = random_admissible(&g, 2, 9);
        let (_, r) = projection_report(&SourceTensor::new(f, 1e-12).unwrap()).unwrap();
        assert!(r.identity_residual <= 5e-2, "{r:?}");
        assert!(r.h_residual <= 1e-10, "{r:?}");
    }

    #[test]
    fn h_commutes_with_tangential_shifts() {
        let g = grid2(1.0 / 32.0, 4.0, 4.0);
        let f = random_admissible(&g, 2, 5);
        let nn = g.shape[1];
        let nt = g.shape[0];
        let shift = 7;
        let mut shifted = f.clone();
        for p in 0..g.len() {
            let (i, k) = (p / nn, p % nn);
            let src = ((i + nt - shift) % nt) * nn + k;
            for c in 0..4 {
                shifted.set(p, c, f.get(src, c));
            }
        }
        let h0 = compute_h(&SourceTensor::new(f, 1e-12).unwrap()).unwrap();
        let h1 = compute_h(&SourceTensor::new(shifted, 1e-12).unwrap()).unwrap();
        let mut e: f64 = 0.0;
        for p in 0..g.len() {
            let (i, k) = (p / nn, p % nn);
            let src = ((i + nt - shift) % nt) * nn + k;
            for c in 0..2 {
                e = e.max((h1.get(p, c) - h0.get(src, c)).abs());
            }
        }
        assert!(e <= 1e-3 * h0.max_abs().max(1.0), "{e}");
    }
}
