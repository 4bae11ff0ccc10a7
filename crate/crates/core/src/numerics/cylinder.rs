//! Space-time norms over parabolic cylinders `Q_r(t0, x0)`.

use serde::{Deserialize, Serialize};

use super::field::TimeSeries;
use crate::error::{LabError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cylinder {
    pub t0: f64,
    pub x0: Vec<f64>,
    pub r: f64,
}

impl Cylinder {
    pub fn new(t0: f64, x0: Vec<f64>, r: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(LabError::InvalidArgument("cylinder radius must be positive".into()));
        }
        Ok(Cylinder { t0, x0, r })
    }

    /// |B_r| r^2
    pub fn volume(&self) -> f64 {
        let n = self.x0.len();
        let ball = match n {
            1 => 2.0 * self.r,
            2 => std::f64::consts::PI * self.r * self.r,
            _ => 4.0 / 3.0 * std::f64::consts::PI * self.r.powi(3),
        };
        ball * self.r * self.r
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum NormKind {
    L2,
    Linf,
    Lp(f64),
}

/// Spatial weights of the cylinder's ball: a ramp of width h around the
/// sphere, so the discrete measure converges at second order and nests.
pub fn ball_weights(series: &TimeSeries, x0: &[f64], r: f64) -> Result<Vec<f64>> {
    let g = series.grid();
    let q = Cylinder { t0: 0.0, x0: x0.to_vec(), r };
    if q.x0.len() != g.n {
        return Err(LabError::InvalidArgument("cylinder centre has the wrong dimension".into()));
    }
    for a in 0..g.n {
        if g.periodic[a] {
            continue;
        }
        let lo = g.origin[a];
        let hi = lo + g.extent(a);
        if q.x0[a] - q.r - g.h < lo - 1e-12 || q.x0[a] + q.r + g.h > hi + 1e-12 {
            return Err(LabError::OutsideSample(format!("axis {a}")));
        }
    }
    let cell = g.h.powi(g.n as i32);
    let w = (0..g.len())
        .map(|p| {
            let x = g.position(p);
            let mut d2 = 0.0;
            for a in 0..g.n {
                let mut d = x[a] - q.x0[a];
                if g.periodic[a] {
                    let per = g.extent(a);
                    d -= per * (d / per).round();
                }
                d2 += d * d;
            }
            let ramp = ((q.r - d2.sqrt()) / g.h + 0.5).clamp(0.0, 1.0);
            ramp * cell
        })
        .collect();
    Ok(w)
}

fn magnitude(series: &TimeSeries, k: usize, p: usize) -> f64 {
    let f = &series.snapshots[k];
    let c = f.components;
    let mut s = 0.0;
    for j in 0..c {
        let v = f.values[p * c + j];
        s += v * v;
    }
    s.sqrt()
}

/// Integrates a nonnegative per-snapshot quantity over `[a, b]`, linear in time.
fn time_integral(times: &[f64], vals: &[f64], a: f64, b: f64) -> f64 {
    let interp = |t: f64| -> f64 {
        let k = times.partition_point(|&s| s <= t).clamp(1, times.len() - 1);
        let (t0, t1) = (times[k - 1], times[k]);
        let th = (t - t0) / (t1 - t0);
        vals[k - 1] * (1.0 - th) + vals[k] * th
    };
    let mut pts = vec![(a, interp(a))];
    for (t, v) in times.iter().zip(vals) {
        if *t > a && *t < b {
            pts.push((*t, *v));
        }
    }
    pts.push((b, interp(b)));
    pts.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1)).sum()
}

pub fn cylinder_norm(series: &TimeSeries, q: &Cylinder, kind: NormKind) -> Result<f64> {
    window_norm(series, &q.x0, q.r, q.t0 - q.r * q.r, q.t0, kind)
}

/// Norm over `(ta, tb) x B_r(x0)`.
pub fn window_norm(series: &TimeSeries, x0: &[f64], r: f64, ta: f64, tb: f64, kind: NormKind) -> Result<f64> {
    let times = &series.times;
    let tol = 1e-12 * (1.0 + tb.abs());
    if ta < times[0] - tol || tb > times[times.len() - 1] + tol {
        return Err(LabError::OutsideSample(format!("time window [{ta}, {tb}]")));
    }
    let w = ball_weights(series, x0, r)?;
    let (ta, tb) = (ta.max(times[0]), tb.min(times[times.len() - 1]));
    match kind {
        NormKind::Linf => {
            let mut m: f64 = 0.0;
            for (k, &t) in times.iter().enumerate() {
                // snapshots inside the window plus the ones bracketing its ends
                let inside = t >= ta - tol && t <= tb + tol;
                let bracket = (k + 1 < times.len() && t < ta && times[k + 1] > ta)
                    || (k > 0 && t > tb && times[k - 1] < tb);
                if !(inside || bracket) {
                    continue;
                }
                for (p, &wp) in w.iter().enumerate() {
                    if wp > 0.0 {
                        m = m.max(magnitude(series, k, p));
                    }
                }
            }
            Ok(m)
        }
        NormKind::L2 | NormKind::Lp(_) => {
            let p_exp = match kind {
                NormKind::Lp(p) => p,
                _ => 2.0,
            };
            if !(p_exp >= 1.0) {
                return Err(LabError::InvalidArgument("norm exponent must be >= 1".into()));
            }
            let per: Vec<f64> = (0..times.len())
                .map(|k| w.iter().enumerate().map(|(p, wp)| wp * magnitude(series, k, p).powf(p_exp)).sum())
                .collect();
            if times.len() == 1 {
                return Ok(0.0);
            }
            Ok(time_integral(times, &per, ta, tb).max(0.0).powf(1.0 / p_exp))
        }
    }
}
