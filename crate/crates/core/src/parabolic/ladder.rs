use super::ParabolicProblem;
use crate::error::{LabError, Result};
use crate::numerics::{apply_divergence_form, Field};

/// Approximations of `d_t^k u(t0, .)` for `k = 0..=k_max`.
#[derive(Clone, Debug)]
pub struct DerivativeLadder {
    pub t0: f64,
    pub entries: Vec<Field>,
}

impl DerivativeLadder {
    pub fn k_max(&self) -> usize {
        self.entries.len() - 1
    }
}

/// `d_t^k u = L d_t^{k-1} u + d_i d_t^{k-1} f_i`, valid for time-independent
/// coefficients.
pub fn derivative_ladder(p: &ParabolicProblem, u_t0: &Field, t0: f64, k_max: usize) -> Result<DerivativeLadder> {
    let g = &u_t0.grid;
    p.a.grid.require_same(g)?;
    for a in 0..g.n {
        if !g.periodic[a] && g.shape[a] < 4 * k_max + 4 {
            return Err(LabError::Margin(format!(
                "axis {a} has {} nodes; k_max = {k_max} needs a margin of {} nodes from each face",
                g.shape[a],
                2 * k_max
            )));
        }
    }
    let mut entries = vec![u_t0.clone()];
    for k in 1..=k_max {
        let f = p.forcing.at(k - 1, t0);
        let next = apply_divergence_form(&p.a, &entries[k - 1], f.as_ref())?;
        if next.values.iter().any(|v| !v.is_finite()) {
            return Err(LabError::NonFinite(format!("ladder entry {k}")));
        }
        entries.push(next);
    }
    Ok(DerivativeLadder { t0, entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::field::identity_coefficients;
    use crate::numerics::Grid;
    use crate::parabolic::{solve, Forcing};
    use std::f64::consts::{FRAC_PI_2, TAU};
    use std::sync::Arc;

    #[test]
    fn heat_sine_ladder_alternates() {
        let nx = 16;
        let g = Grid::with_periodic(2, vec![nx, 4], vec![0.0, 0.0], TAU / nx as f64, false, vec![true, true]).unwrap();
        let a = identity_coefficients(&g);
        let u = Field::scalar_from_fn(&g, |x| x[0].sin());
        let p = ParabolicProblem::new(a, u.clone(), 0.0, 1.0, 0.1);
        let lad = derivative_ladder(&p, &u, 0.0, 8).unwrap();
        let node = g.index(&[nx / 4, 0]);
        assert!((g.position(node)[0] - FRAC_PI_2).abs() < 1e-12);
        let c = g.h * g.h / 12.0;
        for k in 0..=8 {
            let v = lad.entries[k].values[node];
            let exact = if k % 2 == 0 { 1.0 } else { -1.0 };
            assert!((v - exact).abs() <= (k as f64) * 1.5 * c + 1e-12, "k={k} v={v}");
        }
    }

    #[test]
    fn constants_have_vanishing_ladder() {
        let g = Grid::new(2, vec![12, 12], vec![0.0, 0.0], 0.1, false).unwrap();
        let a = identity_coefficients(&g);
        let u = Field::scalar_from_fn(&g, |_| 3.0);
        let p = ParabolicProblem::new(a, u.clone(), 0.0, 1.0, 0.1);
        let lad = derivative_ladder(&p, &u, 0.0, 2).unwrap();
        assert!(lad.entries[1].max_abs() < 1e-12 && lad.entries[2].max_abs() < 1e-12);
        let lad0 = derivative_ladder(&p, &u, 0.0, 0).unwrap();
        assert_eq!(lad0.entries.len(), 1);
        assert_eq!(lad0.entries[0], u);
        assert!(matches!(derivative_ladder(&p, &u, 0.0, 3), Err(LabError::Margin(_))));
    }

    #[test]
    fn first_entry_matches_time_difference_of_march() {
        let nx = 64;
        let g = Grid::with_periodic(2, vec![nx, nx], vec![0.0, 0.0], TAU / nx as f64, false, vec![true, true]).unwrap();
        let a = Field::from_fn(&g, 4, |x, o| {
            o[0] = 1.0 + 0.3 * x[1].cos();
            o[1] = 0.1 * x[0].sin();
            o[2] = 0.1 * x[0].sin();
            o[3] = 1.2;
        });
        let u0 = Field::scalar_from_fn(&g, |x| (x[0] + x[1]).sin());
        let forcing = Forcing::Given(Arc::new({
            let g = g.clone();
            move |m: usize, t: f64| {
                let s = if m % 2 == 0 { 1.0 } else { -1.0 } * (-t).exp();
                Field::from_fn(&g, 2, |x, o| {
                    o[0] = s * x[1].sin();
                    o[1] = s * 0.5 * x[0].cos();
                })
            }
        }));
        let mut errs = vec![];
        for dtt in [0.002, 0.001] {
        let mut p = ParabolicProblem::new(a.clone(), u0.clone(), 0.0, 0.2, dtt);
        p.forcing = forcing.clone();
        let s = solve(&p).unwrap();
        let k = (0.1 / dtt) as usize;
        let lad = derivative_ladder(&p, &s.snapshots[k], s.times[k], 1).unwrap();
        let dt = s.times[k + 1] - s.times[k];
        let mut worst: f64 = 0.0;
        for i in 0..g.len() {
            let fd = (s.snapshots[k + 1].values[i] - s.snapshots[k - 1].values[i]) / (2.0 * dt);
            worst = worst.max((fd - lad.entries[1].values[i]).abs());
        }
        errs.push(worst);
        }
        assert!(errs[1] < 1e-5, "{errs:?}");
        assert!(errs[0] / errs[1] > 3.0, "{errs:?}");
    }
}
