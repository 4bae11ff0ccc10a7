//! Half-space grids with periodic tangential axes, viewed mode by mode: a
//! discrete Fourier transform in `x'` and nodal columns in `x_n`.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{LabError, Result};
use crate::numerics::{Field, Grid};

#[derive(Clone, Debug)]
pub struct ModeGrid {
    pub grid: Grid,
    pub n: usize,
    /// Tangential nodes per axis.
    pub nt: usize,
    /// Normal nodes `x_n = k h`.
    pub nn: usize,
    pub h: f64,
    /// Tangential frequency vectors in transform order.
    pub xis: Vec<Vec<f64>>,
}

impl ModeGrid {
    pub fn new(grid: &Grid) -> Result<Self> {
        let n = grid.n;
        if !grid.halfspace {
            return Err(LabError::InvalidArgument("mode grids live on the half space".into()));
        }
        if grid.origin[n - 1] != 0.0 || grid.periodic[n - 1] {
            return Err(LabError::InvalidArgument("normal axis must start at x_n = 0 and not be periodic".into()));
        }
        let nt = grid.shape[0];
        for a in 0..n - 1 {
            if !grid.periodic[a] || grid.shape[a] != nt {
                return Err(LabError::InvalidArgument("tangential axes must be periodic with equal node counts".into()));
            }
        }
        let period = nt as f64 * grid.h;
        let freq = |k: usize| 2.0 * std::f64::consts::PI * (if k <= nt / 2 { k as f64 } else { k as f64 - nt as f64 }) / period;
        let mut xis = Vec::new();
        if n == 2 {
            for a in 0..nt {
                xis.push(vec![freq(a)]);
            }
        } else {
            for a in 0..nt {
                for b in 0..nt {
                    xis.push(vec![freq(a), freq(b)]);
                }
            }
        }
        Ok(ModeGrid { grid: grid.clone(), n, nt, nn: grid.shape[n - 1], h: grid.h, xis })
    }

    pub fn modes(&self) -> usize {
        self.xis.len()
    }

    pub fn period(&self) -> f64 {
        self.nt as f64 * self.h
    }

    /// Whether the mode is the highest frequency of an even-sized axis, where
    /// odd multipliers (first derivatives) are set to zero.
    pub fn nyquist(&self, m: usize) -> bool {
        if self.nt % 2 == 1 {
            return false;
        }
        if self.n == 2 {
            m == self.nt / 2
        } else {
            m / self.nt == self.nt / 2 || m % self.nt == self.nt / 2
        }
    }

    /// `i xi_a` with the Nyquist convention.
    pub fn dmult(&self, m: usize, a: usize) -> Complex64 {
        if self.nyquist(m) {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, self.xis[m][a])
        }
    }

    /// Transform one component; the result is laid out `[mode][k]`.
    pub fn forward(&self, f: &Field, c: usize) -> Vec<Complex64> {
        let nm = self.modes();
        let mut out = vec![Complex64::new(0.0, 0.0); nm * self.nn];
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(self.nt);
        let mut buf = vec![Complex64::new(0.0, 0.0); nm];
        for k in 0..self.nn {
            for (t, b) in buf.iter_mut().enumerate() {
                *b = Complex64::new(f.values[(t * self.nn + k) * f.components + c], 0.0);
            }
            self.transform(&mut buf, &*fft);
            for (m, b) in buf.iter().enumerate() {
                out[m * self.nn + k] = *b;
            }
        }
        out
    }

    /// Inverse of [`forward`], returning real nodal values.
    pub fn inverse(&self, data: &[Complex64]) -> Vec<f64> {
        let nm = self.modes();
        let mut out = vec![0.0; nm * self.nn];
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_inverse(self.nt);
        let mut buf = vec![Complex64::new(0.0, 0.0); nm];
        let scale = 1.0 / nm as f64;
        for k in 0..self.nn {
            for (m, b) in buf.iter_mut().enumerate() {
                *b = data[m * self.nn + k];
            }
            self.transform(&mut buf, &*fft);
            for (t, b) in buf.iter().enumerate() {
                out[t * self.nn + k] = b.re * scale;
            }
        }
        out
    }

    fn transform(&self, buf: &mut [Complex64], fft: &dyn rustfft::Fft<f64>) {
        if self.n == 2 {
            fft.process(buf);
        } else {
            let m = self.nt;
            for row in buf.chunks_mut(m) {
                fft.process(row);
            }
            let mut col = vec![Complex64::new(0.0, 0.0); m];
            for b in 0..m {
                for a in 0..m {
                    col[a] = buf[a * m + b];
                }
                fft.process(&mut col);
                for a in 0..m {
                    buf[a * m + b] = col[a];
                }
            }
        }
    }

    /// Assemble a field from per-component nodal values.
    pub fn field(&self, comps: Vec<Vec<f64>>) -> Result<Field> {
        Field::from_components(&self.grid, &comps)
    }

    /// Partial derivative of one component along `axis`: spectral in the
    /// tangential axes, second-order differences along the normal.
    pub fn derivative(&self, f: &Field, c: usize, axis: usize) -> Vec<f64> {
        if axis + 1 == self.n {
            let nn = self.nn;
            let h = self.h;
            let mut out = vec![0.0; f.grid.len()];
            for col in 0..f.grid.len() / nn {
                let v = |k: usize| f.values[(col * nn + k) * f.components + c];
                for k in 0..nn {
                    out[col * nn + k] = if k == 0 {
                        (-3.0 * v(0) + 4.0 * v(1) - v(2)) / (2.0 * h)
                    } else if k + 1 == nn {
                        (3.0 * v(k) - 4.0 * v(k - 1) + v(k - 2)) / (2.0 * h)
                    } else {
                        (v(k + 1) - v(k - 1)) / (2.0 * h)
                    };
                }
            }
            out
        } else {
            let mut hat = self.forward(f, c);
            for m in 0..self.modes() {
                let d = self.dmult(m, axis);
                for k in 0..self.nn {
                    hat[m * self.nn + k] *= d;
                }
            }
            self.inverse(&hat)
        }
    }

    /// `sum_i d_i F_ij` for a tensor field (`F_ij` at component `i n + j`), or
    /// `sum_i d_i f_i` for a vector field.
    pub fn divergence(&self, f: &Field) -> Result<Field> {
        let n = self.n;
        let len = f.grid.len();
        if f.components == n {
            let mut out = vec![0.0; len];
            for i in 0..n {
                for (o, d) in out.iter_mut().zip(self.derivative(f, i, i)) {
                    *o += d;
                }
            }
            Field::new(f.grid.clone(), 1, out)
        } else if f.components == n * n {
            let mut comps = vec![vec![0.0; len]; n];
            for j in 0..n {
                for i in 0..n {
                    for (o, d) in comps[j].iter_mut().zip(self.derivative(f, i * n + j, i)) {
                        *o += d;
                    }
                }
            }
            Field::from_components(&f.grid, &comps)
        } else {
            Err(LabError::ComponentMismatch { expected: n * n, found: f.components })
        }
    }
}

/// Half-space grid with periodic tangential axes of `nt` nodes and `nn` normal nodes.
pub fn halfspace_grid(n: usize, nt: usize, nn: usize, h: f64) -> Result<Grid> {
    let mut shape = vec![nt; n];
    shape[n - 1] = nn;
    let mut periodic = vec![true; n];
    periodic[n - 1] = false;
    Grid::with_periodic(n, shape, vec![0.0; n], h, true, periodic)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn round_trip_and_spectral_derivative() {
        for n in [2, 3] {
            let g = halfspace_grid(n, 16, 9, 1.0 / 16.0).unwrap();
            let mg = ModeGrid::new(&g).unwrap();
            let f = Field::scalar_from_fn(&g, |x| (TAU * x[0]).sin() * x[n - 1] + (TAU * 2.0 * x[n - 2]).cos());
            let back = mg.inverse(&mg.forward(&f, 0));
            assert!(back.iter().zip(&f.values).all(|(a, b)| (a - b).abs() < 1e-13));
            let d = mg.derivative(&f, 0, 0);
            for p in 0..g.len() {
                let x = g.position(p);
                let mut e = TAU * (TAU * x[0]).cos() * x[n - 1];
                if n == 2 {
                    e += -2.0 * TAU * (TAU * 2.0 * x[0]).sin();
                }
                assert!((d[p] - e).abs() < 1e-11);
            }
            let dn = mg.derivative(&f, 0, n - 1);
            for p in 0..g.len() {
                let x = g.position(p);
                assert!((dn[p] - (TAU * x[0]).sin()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_unsuitable_grids() {
        let g = Grid::new(2, vec![8, 8], vec![0.0, 0.0], 0.1, true).unwrap();
        assert!(ModeGrid::new(&g).is_err());
        let g = Grid::new(2, vec![8, 8], vec![0.0, 0.0], 0.1, false).unwrap();
        assert!(ModeGrid::new(&g).is_err());
    }
}
