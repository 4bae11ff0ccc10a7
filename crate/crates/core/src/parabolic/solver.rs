use super::{ParabolicProblem, Scheme};
use crate::error::{LabError, Result};
use crate::numerics::krylov::bicgstab;
use crate::numerics::{CoefficientAudit, DivergenceOperator, Field, NodeKind, TimeSeries};

/// Theta-scheme march of `d_t u = d_i(a_ij d_j u) + d_i f_i`. Nodes without a
/// full stencil (faces of non-periodic axes) keep their initial values.
pub fn solve(p: &ParabolicProblem) -> Result<TimeSeries> {
    solve_with_boundary(p, |_, _| {})
}

/// Like [`solve`], with `boundary(t, u)` allowed to overwrite face values of
/// the new state before each implicit solve.
pub fn solve_with_boundary<B: FnMut(f64, &mut [f64])>(p: &ParabolicProblem, mut boundary: B) -> Result<TimeSeries> {
    let grid = p.u_init.grid.clone();
    if grid.halfspace {
        return Err(LabError::HalfspaceGrid);
    }
    p.a.grid.require_same(&grid)?;
    if p.u_init.components != 1 {
        return Err(LabError::ComponentMismatch { expected: 1, found: p.u_init.components });
    }
    let audit = CoefficientAudit::of(&p.a)?;
    if !audit.is_elliptic() {
        return Err(LabError::InvalidArgument(format!("coefficients not elliptic: {audit:?}")));
    }
    let span = p.t_end - p.t_start;
    if !(p.dt > 0.0) || !(span > 0.0) {
        return Err(LabError::InvalidArgument("need dt > 0 and t_end > t_start".into()));
    }
    let theta = p.scheme.theta();
    if p.scheme == Scheme::Explicit {
        let limit = grid.h * grid.h / (2.0 * grid.n as f64 * audit.lambda_max);
        if p.dt > limit * (1.0 + 1e-12) {
            return Err(LabError::Stability { dt: p.dt, limit });
        }
    }
    let mut steps = (span / p.dt).round() as usize;
    if steps == 0 || ((steps as f64) * p.dt - span).abs() > 1e-9 * span {
        steps = (span / p.dt).ceil() as usize;
    }
    let dt = span / steps as f64;
    let op = DivergenceOperator::new(&p.a)?;
    let mask: Vec<bool> = op.interior_mask().to_vec();
    let len = grid.len();
    let forcing_div = |t: f64| -> Option<Vec<f64>> {
        p.forcing.at(0, t).map(|f| {
            let mut d = vec![0.0; len];
            op.divergence_interior(&f, &mut d);
            d
        })
    };
    let reference = p.u_init.max_abs() + 1.0;
    let mut u = p.u_init.values.clone();
    let mut times = vec![p.t_start];
    let mut snaps = vec![p.u_init.clone()];
    let mut lu = vec![0.0; len];
    let mut b_old = forcing_div(p.t_start);
    let save = p.save_every.max(1);
    for step in 1..=steps {
        let t_new = p.t_start + step as f64 * dt;
        let b_new = forcing_div(t_new);
        op.apply_interior(&u, &mut lu);
        let mut rhs = u.clone();
        for i in 0..len {
            if !mask[i] {
                continue;
            }
            let mut src = 0.0;
            if let Some(b) = &b_old {
                src += (1.0 - theta) * b[i];
            }
            if let Some(b) = &b_new {
                src += theta * b[i];
            }
            rhs[i] += dt * ((1.0 - theta) * lu[i] + src);
        }
        boundary(t_new, &mut rhs);
        if theta == 0.0 {
            u = rhs;
        } else {
            let mut x = u.clone();
            for i in 0..len {
                if !mask[i] {
                    x[i] = rhs[i];
                }
            }
            let mut tmp = vec![0.0; len];
            bicgstab(
                |v, out| {
                    op.apply_interior(v, &mut tmp);
                    for i in 0..len {
                        out[i] = if mask[i] { v[i] - theta * dt * tmp[i] } else { v[i] };
                    }
                },
                &rhs,
                &mut x,
                1e-13,
                5000,
            )?;
            u = x;
        }
        let m = u.iter().fold(0.0f64, |m, v| if v.is_finite() { m.max(v.abs()) } else { f64::INFINITY });
        if !m.is_finite() || m > 1e6 * reference {
            return Err(LabError::Divergence(format!("|u| = {m:e} at t = {t_new}")));
        }
        b_old = b_new;
        if step % save == 0 || step == steps {
            times.push(t_new);
            snaps.push(Field::new(grid.clone(), 1, u.clone())?);
        }
    }
    TimeSeries::new(times, snaps, NodeKind::Uniform)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::field::identity_coefficients;
    use crate::numerics::Grid;
    use std::f64::consts::TAU;

    fn periodic(nx: usize) -> Grid {
        Grid::with_periodic(2, vec![nx, 4], vec![0.0, 0.0], TAU / nx as f64, false, vec![true, true]).unwrap()
    }

    #[test]
    fn zero_and_constant_data_stay_put() {
        let g = Grid::new(2, vec![8, 8], vec![0.0, 0.0], 0.1, false).unwrap();
        let a = identity_coefficients(&g);
        for c in [0.0, 2.5] {
            let u0 = Field::scalar_from_fn(&g, |_| c);
            let s = solve(&ParabolicProblem::new(a.clone(), u0, 0.0, 0.05, 0.01)).unwrap();
            assert!(s.snapshots.iter().all(|f| f.values.iter().all(|v| (v - c).abs() < 1e-12)));
        }
    }

    #[test]
    fn heat_sine_mode_second_order_in_time() {
        let g = periodic(64);
        let a = identity_coefficients(&g);
        let u0 = Field::scalar_from_fn(&g, |x| x[0].sin());
        let lam = (2.0 - 2.0 * g.h.cos()) / (g.h * g.h);
        let mut errs = Vec::new();
        for dt in [0.1, 0.05, 0.025] {
            let s = solve(&ParabolicProblem::new(a.clone(), u0.clone(), 0.0, 1.0, dt)).unwrap();
            let last = s.snapshots.last().unwrap();
            // compare against the semi-discrete solution to isolate the time error
            let e = (0..g.len()).fold(0.0f64, |m, p| m.max((last.values[p] - (-lam).exp() * u0.values[p]).abs()));
            errs.push(e);
        }
        assert!((errs[0] / errs[1]).log2() > 1.9 && (errs[1] / errs[2]).log2() > 1.9, "{errs:?}");
        // and against e^{-t} sin x1 with h^2 ~ dt
        let s = solve(&ParabolicProblem::new(a, u0.clone(), 0.0, 1.0, 0.01)).unwrap();
        let last = s.snapshots.last().unwrap();
        let e = (0..g.len()).fold(0.0f64, |m, p| m.max((last.values[p] - (-1.0f64).exp() * u0.values[p]).abs()));
        assert!(e < 1e-3, "{e}");
    }

    #[test]
    fn explicit_scheme_checks_stability() {
        let g = periodic(32);
        let a = identity_coefficients(&g);
        let u0 = Field::scalar_from_fn(&g, |x| x[0].sin());
        let mut p = ParabolicProblem::new(a, u0, 0.0, 0.1, 0.1);
        p.scheme = Scheme::Explicit;
        assert!(matches!(solve(&p), Err(LabError::Stability { .. })));
        p.dt = 0.2 * g.h * g.h;
        assert!(solve(&p).is_ok());
    }
}
