//! Odd/even reflection of half-space data across x_n = 0, turning Dirichlet
//! and conormal problems into whole-space ones.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::numerics::{Field, Grid};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryMode {
    Dirichlet,
    Conormal,
}

impl std::str::FromStr for BoundaryMode {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dirichlet" => Ok(BoundaryMode::Dirichlet),
            "conormal" => Ok(BoundaryMode::Conormal),
            _ => Err(LabError::InvalidArgument(format!("unknown boundary mode {s:?}"))),
        }
    }
}

pub const DEFAULT_TRACE_TOL: f64 = 1e-8;

fn require_half(f: &Field) -> Result<()> {
    if !f.grid.halfspace {
        return Err(LabError::InvalidArgument("extension needs a half-space grid".into()));
    }
    Ok(())
}

/// Copies every component of `f` onto the mirrored grid; component `c` is
/// reflected with sign `sign(c)` and its interface value replaced by
/// `interface(c, value)`.
fn reflect<S, I>(f: &Field, sign: S, interface: I) -> Result<Field>
where
    S: Fn(usize) -> f64,
    I: Fn(usize, f64) -> f64,
{
    let half = &f.grid;
    let whole = half.mirrored()?;
    let n = half.n;
    let nn = half.shape[n - 1];
    let c = f.components;
    let mut values = vec![0.0; whole.len() * c];
    for p in 0..half.len() {
        let mut m = half.multi(p);
        let k = m[n - 1];
        m[n - 1] = nn - 1 + k;
        let up = whole.index(&m);
        m[n - 1] = nn - 1 - k;
        let dn = whole.index(&m);
        for j in 0..c {
            let v = f.get(p, j);
            if k == 0 {
                values[up * c + j] = interface(j, v);
            } else {
                values[up * c + j] = v;
                values[dn * c + j] = sign(j) * v;
            }
        }
    }
    Field::new(whole, c, values)
}

/// Largest |u| on the boundary row x_n = 0.
pub fn boundary_trace(u: &Field) -> f64 {
    let g = &u.grid;
    let n = g.n;
    (0..g.len())
        .filter(|&p| g.multi(p)[n - 1] == 0)
        .flat_map(|p| (0..u.components).map(move |c| (p, c)))
        .fold(0.0, |m, (p, c)| m.max(u.get(p, c).abs()))
}

/// Dirichlet: `sgn(x_n) u(x', |x_n|)`; conormal: `u(x', |x_n|)`.
pub fn extend_solution(u: &Field, mode: BoundaryMode, trace_tol: Option<f64>) -> Result<Field> {
    require_half(u)?;
    if u.components != 1 {
        return Err(LabError::ComponentMismatch { expected: 1, found: u.components });
    }
    match mode {
        BoundaryMode::Dirichlet => {
            let tol = trace_tol.unwrap_or(DEFAULT_TRACE_TOL) * u.max_abs();
            let trace = boundary_trace(u);
            if trace > tol {
                return Err(LabError::DirichletTrace { trace, tol });
            }
            reflect(u, |_| -1.0, |_, v| v)
        }
        BoundaryMode::Conormal => reflect(u, |_| 1.0, |_, v| v),
    }
}

/// Dirichlet: tangential components odd, f_n even. Conormal: the reverse.
pub fn extend_flux(f: &Field, mode: BoundaryMode) -> Result<Field> {
    require_half(f)?;
    let n = f.grid.n;
    if f.components != n {
        return Err(LabError::ComponentMismatch { expected: n, found: f.components });
    }
    let sign = move |c: usize| -> f64 {
        let normal = c == n - 1;
        match (mode, normal) {
            (BoundaryMode::Dirichlet, false) | (BoundaryMode::Conormal, true) => -1.0,
            _ => 1.0,
        }
    };
    reflect(f, sign, |_, v| v)
}

fn mixed(n: usize, c: usize) -> bool {
    let (i, j) = (c / n, c % n);
    (i == n - 1) != (j == n - 1)
}

/// Mixed normal/tangential entries odd (zero on the interface row), all
/// others even. The rule is the same for both boundary modes.
pub fn extend_coefficients(a: &Field) -> Result<Field> {
    require_half(a)?;
    let n = a.grid.n;
    if a.components != n * n {
        return Err(LabError::ComponentMismatch { expected: n * n, found: a.components });
    }
    reflect(a, |c| if mixed(n, c) { -1.0 } else { 1.0 }, |c, v| if mixed(n, c) { 0.0 } else { v })
}

/// Largest violation of `f(x', -a) = sign * f(x', a)` for component `c` of a
/// field on a mirrored grid.
pub fn parity_defect(f: &Field, c: usize, sign: f64) -> f64 {
    let g = &f.grid;
    let n = g.n;
    let nn = g.shape[n - 1];
    let mid = (nn - 1) / 2;
    let mut worst: f64 = 0.0;
    for p in 0..g.len() {
        let mut m = g.multi(p);
        if m[n - 1] <= mid {
            continue;
        }
        m[n - 1] = nn - 1 - m[n - 1];
        let q = g.index(&m);
        worst = worst.max((f.get(q, c) - sign * f.get(p, c)).abs());
    }
    worst
}

/// Restriction of a mirrored-grid field back to x_n >= 0.
pub fn restrict(f: &Field, half: &Grid) -> Result<Field> {
    let whole = half.mirrored()?;
    whole.require_same(&f.grid)?;
    let n = half.n;
    let off = half.shape[n - 1] - 1;
    let c = f.components;
    let mut values = vec![0.0; half.len() * c];
    for p in 0..half.len() {
        let mut m = half.multi(p);
        m[n - 1] += off;
        let q = whole.index(&m);
        values[p * c..(p + 1) * c].copy_from_slice(&f.values[q * c..(q + 1) * c]);
    }
    Field::new(half.clone(), c, values)
}

/// max |a_nj d_j u + f_n| on x_n = 0 with second-order one-sided normal
/// differences; reported, not enforced.
pub fn conormal_trace(a: &Field, u: &Field, f: Option<&Field>) -> Result<f64> {
    require_half(u)?;
    u.grid.require_same(&a.grid)?;
    let g = &u.grid;
    let n = g.n;
    let h = g.h;
    let mut worst: f64 = 0.0;
    for p in 0..g.len() {
        let m = g.multi(p);
        if m[n - 1] != 0 {
            continue;
        }
        let mut flux = f.map(|f| f.get(p, n - 1)).unwrap_or(0.0);
        for j in 0..n {
            let d = if j == n - 1 {
                let p1 = g.neighbor(p, j, 1).unwrap();
                let p2 = g.neighbor(p, j, 2).unwrap();
                (-3.0 * u.get(p, 0) + 4.0 * u.get(p1, 0) - u.get(p2, 0)) / (2.0 * h)
            } else {
                match (g.neighbor(p, j, 1), g.neighbor(p, j, -1)) {
                    (Some(a1), Some(b1)) => (u.get(a1, 0) - u.get(b1, 0)) / (2.0 * h),
                    (Some(a1), None) => (u.get(a1, 0) - u.get(p, 0)) / h,
                    (None, Some(b1)) => (u.get(p, 0) - u.get(b1, 0)) / h,
                    _ => 0.0,
                }
            };
            flux += a.get(p, (n - 1) * n + j) * d;
        }
        worst = worst.max(flux.abs());
    }
    Ok(worst)
}
