use crate::error::{LabError, Result};
use crate::numerics::cylinder::window_norm;
use crate::numerics::{cylinder_norm, Cylinder, Field, NormKind, TimeSeries};

/// Centred-difference gradient of every snapshot (one-sided on faces).
pub fn gradient_series(u: &TimeSeries) -> Result<TimeSeries> {
    let g = u.grid().clone();
    let n = g.n;
    let snaps = u
        .snapshots
        .iter()
        .map(|f| {
            let mut vals = vec![0.0; g.len() * n];
            for p in 0..g.len() {
                for a in 0..n {
                    let d = match (g.neighbor(p, a, 1), g.neighbor(p, a, -1)) {
                        (Some(x), Some(y)) => (f.values[x] - f.values[y]) / (2.0 * g.h),
                        (Some(x), None) => (f.values[x] - f.values[p]) / g.h,
                        (None, Some(y)) => (f.values[p] - f.values[y]) / g.h,
                        _ => 0.0,
                    };
                    vals[p * n + a] = d;
                }
            }
            Field::new(g.clone(), n, vals)
        })
        .collect::<Result<Vec<_>>>()?;
    TimeSeries::new(u.times.clone(), snaps, u.kind)
}

fn component_series(f: &TimeSeries, c: usize) -> Result<TimeSeries> {
    let snaps = f
        .snapshots
        .iter()
        .map(|s| Field::new(s.grid.clone(), 1, s.component(c)))
        .collect::<Result<Vec<_>>>()?;
    TimeSeries::new(f.times.clone(), snaps, f.kind)
}

/// `sum_i ||f_i||` over `(ta, tb) x B_r(x0)`.
fn flux_sum(f: Option<&TimeSeries>, x0: &[f64], r: f64, ta: f64, tb: f64, kind: NormKind) -> Result<f64> {
    let Some(f) = f else { return Ok(0.0) };
    let mut s = 0.0;
    for c in 0..f.snapshots[0].components {
        s += window_norm(&component_series(f, c)?, x0, r, ta, tb, kind)?;
    }
    Ok(s)
}

fn check_scalar(u: &TimeSeries) -> Result<()> {
    if u.snapshots[0].components != 1 {
        return Err(LabError::ComponentMismatch { expected: 1, found: u.snapshots[0].components });
    }
    Ok(())
}

/// `||grad u||_{L2(Q_r)} / ((R - r)^{-1} ||u||_{L2(Q_R)} + sum_i ||f_i||_{L2(Q_R)})`.
pub fn audit_caccioppoli(
    u: &TimeSeries,
    f: Option<&TimeSeries>,
    r: f64,
    big_r: f64,
    t0: f64,
    x0: &[f64],
) -> Result<f64> {
    check_scalar(u)?;
    if !(0.0 < r && r < big_r) {
        return Err(LabError::InvalidArgument("need 0 < r < R".into()));
    }
    let qr = Cylinder::new(t0, x0.to_vec(), r)?;
    let q_big = Cylinder::new(t0, x0.to_vec(), big_r)?;
    let num = cylinder_norm(&gradient_series(u)?, &qr, NormKind::L2)?;
    let den = cylinder_norm(u, &q_big, NormKind::L2)? / (big_r - r)
        + flux_sum(f, x0, big_r, t0 - big_r * big_r, t0, NormKind::L2)?;
    Ok(if den == 0.0 { 0.0 } else { num / den })
}

/// `||u||_{Linf(Q_{R/2})} / (R^{-1-n/2} ||u||_{L2(Q_R)} + R^{1-(n+2)/p} sum_i ||f_i||_{Lp(Q_R)})`,
/// with `p = None` meaning p = infinity.
pub fn audit_local_boundedness(
    u: &TimeSeries,
    f: Option<&TimeSeries>,
    big_r: f64,
    t0: f64,
    x0: &[f64],
    p: Option<f64>,
) -> Result<f64> {
    check_scalar(u)?;
    let n = u.grid().n as f64;
    let half = Cylinder::new(t0, x0.to_vec(), 0.5 * big_r)?;
    let full = Cylinder::new(t0, x0.to_vec(), big_r)?;
    let num = cylinder_norm(u, &half, NormKind::Linf)?;
    let (kind, expo) = match p {
        None => (NormKind::Linf, 1.0),
        Some(p) => (NormKind::Lp(p), 1.0 - (n + 2.0) / p),
    };
    let den = big_r.powf(-1.0 - n / 2.0) * cylinder_norm(u, &full, NormKind::L2)?
        + big_r.powf(expo) * flux_sum(f, x0, big_r, t0 - big_r * big_r, t0, kind)?;
    Ok(if den == 0.0 { 0.0 } else { num / den })
}

/// Optional audit of the L2 time-derivative estimate on `Q = (s, t) x B_r(x0)`:
/// `||d_t u||_{L2(Q)} / (delta sum ||d_t f_i||_{L2(Q^delta)} + delta^{-1}(||grad u|| + sum ||f_i||)_{L2(Q^delta)})`
/// where `Q^delta = (s - delta^2, t) x B_{r + delta}(x0)`.
#[allow(clippy::too_many_arguments)]
pub fn audit_time_derivative(
    u: &TimeSeries,
    dtu: &TimeSeries,
    f: Option<&TimeSeries>,
    dtf: Option<&TimeSeries>,
    s: f64,
    t: f64,
    r: f64,
    x0: &[f64],
    delta: f64,
) -> Result<f64> {
    check_scalar(u)?;
    let num = window_norm(dtu, x0, r, s, t, NormKind::L2)?;
    let (sd, rd) = (s - delta * delta, r + delta);
    let den = delta * flux_sum(dtf, x0, rd, sd, t, NormKind::L2)?
        + (window_norm(&gradient_series(u)?, x0, rd, sd, t, NormKind::L2)?
            + flux_sum(f, x0, rd, sd, t, NormKind::L2)?)
            / delta;
    Ok(if den == 0.0 { 0.0 } else { num / den })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{Grid, NodeKind};

    fn heat_series(h: f64, amp: f64) -> (TimeSeries, TimeSeries) {
        let nx = (6.0 / h).round() as usize + 1;
        let g = Grid::new(2, vec![nx, nx], vec![-3.0, -3.0], h, false).unwrap();
        let times: Vec<f64> = (0..=40).map(|k| k as f64 * 0.05).collect();
        let u = times.iter().map(|&t| Field::scalar_from_fn(&g, |x| amp * (-t).exp() * x[0].sin())).collect();
        let f = times.iter().map(|&t| Field::from_fn(&g, 2, |x, o| o[0] = amp * t * x[1].cos())).collect();
        (
            TimeSeries::new(times.clone(), u, NodeKind::Uniform).unwrap(),
            TimeSeries::new(times, f, NodeKind::Uniform).unwrap(),
        )
    }

    #[test]
    fn constant_solution_ratios() {
        let h = 0.0625;
        let nx = 97;
        let g = Grid::new(2, vec![nx, nx], vec![-3.0, -3.0], h, false).unwrap();
        let times: Vec<f64> = (0..=40).map(|k| k as f64 * 0.05).collect();
        let c = 2.0;
        let u = TimeSeries::new(times.clone(), times.iter().map(|_| Field::scalar_from_fn(&g, |_| c)).collect(), NodeKind::Uniform).unwrap();
        assert_eq!(audit_caccioppoli(&u, None, 0.5, 1.0, 1.5, &[0.0, 0.0]).unwrap(), 0.0);
        let big_r = 1.0;
        let q = Cylinder::new(1.5, vec![0.0, 0.0], big_r).unwrap();
        let ratio = audit_local_boundedness(&u, None, big_r, 1.5, &[0.0, 0.0], None).unwrap();
        let discrete = big_r.powf(2.0) / cylinder_norm(&u, &q, NormKind::L2).unwrap() * c;
        assert!((ratio - discrete).abs() < 1e-12);
        let exact = big_r.powf(2.0) / q.volume().sqrt();
        assert!((ratio - exact).abs() < 0.02 * exact);
    }

    #[test]
    fn ratios_are_one_homogeneous() {
        let (u, f) = heat_series(0.1, 1.0);
        let (u7, f7) = heat_series(0.1, 7.0);
        let a = audit_caccioppoli(&u, Some(&f), 0.5, 1.0, 1.5, &[0.2, 0.0]).unwrap();
        let b = audit_caccioppoli(&u7, Some(&f7), 0.5, 1.0, 1.5, &[0.2, 0.0]).unwrap();
        assert!(a > 0.0 && (a - b).abs() < 1e-12 * a);
        let a = audit_local_boundedness(&u, Some(&f), 1.0, 1.5, &[0.2, 0.0], None).unwrap();
        let b = audit_local_boundedness(&u7, Some(&f7), 1.0, 1.5, &[0.2, 0.0], None).unwrap();
        assert!((a - b).abs() < 1e-12 * a);
    }

    #[test]
    fn local_boundedness_ratio_is_stable_under_halving() {
        let (u, _) = heat_series(0.03125, 1.0);
        let x0 = [std::f64::consts::FRAC_PI_2, 0.0];
        let vals: Vec<f64> = [1.0, 0.5, 0.25]
            .iter()
            .map(|&r| audit_local_boundedness(&u, None, r, 1.5, &x0, None).unwrap())
            .collect();
        let (lo, hi) = vals.iter().fold((f64::MAX, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
        assert!(hi / lo <= 4.0, "{vals:?}");
    }
}
