//! Uniform rectangular lattices over whole-space or half-space boxes.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub n: usize,
    /// nodes per axis
    pub shape: Vec<usize>,
    pub origin: Vec<f64>,
    pub h: f64,
    /// axis n is restricted to x_n >= 0
    pub halfspace: bool,
    /// periodic axes carry `shape[i]` nodes over a period of `shape[i] * h`
    #[serde(default)]
    pub periodic: Vec<bool>,
}

impl Grid {
    pub fn new(n: usize, shape: Vec<usize>, origin: Vec<f64>, h: f64, halfspace: bool) -> Result<Self> {
        let periodic = vec![false; n];
        Self::with_periodic(n, shape, origin, h, halfspace, periodic)
    }

    pub fn with_periodic(
        n: usize,
        shape: Vec<usize>,
        origin: Vec<f64>,
        h: f64,
        halfspace: bool,
        periodic: Vec<bool>,
    ) -> Result<Self> {
        let g = Grid { n, shape, origin, h, halfspace, periodic };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(LabError::InvalidArgument(format!("grid: {m}")));
        if self.n != 2 && self.n != 3 {
            return bad("dimension must be 2 or 3");
        }
        if self.shape.len() != self.n || self.origin.len() != self.n || self.periodic.len() != self.n {
            return bad("per-axis arrays must have length n");
        }
        if !(self.h > 0.0) || !self.h.is_finite() {
            return bad("spacing must be positive");
        }
        if self.shape.iter().any(|&s| s < 4) {
            return bad("at least 4 nodes per axis");
        }
        if self.origin.iter().any(|o| !o.is_finite()) {
            return bad("origin must be finite");
        }
        if self.halfspace {
            if self.origin[self.n - 1] != 0.0 {
                return bad("half-space grids start at x_n = 0");
            }
            if self.periodic[self.n - 1] {
                return bad("the normal axis cannot be periodic");
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn extent(&self, axis: usize) -> f64 {
        if self.periodic[axis] {
            self.shape[axis] as f64 * self.h
        } else {
            (self.shape[axis] - 1) as f64 * self.h
        }
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.n];
        for a in (0..self.n - 1).rev() {
            s[a] = s[a + 1] * self.shape[a + 1];
        }
        s
    }

    pub fn index(&self, multi: &[usize]) -> usize {
        let mut idx = 0;
        for a in 0..self.n {
            idx = idx * self.shape[a] + multi[a];
        }
        idx
    }

    pub fn multi(&self, mut idx: usize) -> Vec<usize> {
        let mut m = vec![0; self.n];
        for a in (0..self.n).rev() {
            m[a] = idx % self.shape[a];
            idx /= self.shape[a];
        }
        m
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        self.origin[axis] + i as f64 * self.h
    }

    pub fn position(&self, idx: usize) -> Vec<f64> {
        self.multi(idx)
            .iter()
            .enumerate()
            .map(|(a, &i)| self.coord(a, i))
            .collect()
    }

    /// Neighbour `offset` steps along `axis`, wrapping on periodic axes.
    pub fn neighbor(&self, idx: usize, axis: usize, offset: isize) -> Option<usize> {
        let strides = self.strides();
        let i = (idx / strides[axis]) % self.shape[axis];
        let s = self.shape[axis] as isize;
        let mut j = i as isize + offset;
        if self.periodic[axis] {
            j = j.rem_euclid(s);
        } else if j < 0 || j >= s {
            return None;
        }
        Some((idx as isize + (j - i as isize) * strides[axis] as isize) as usize)
    }

    /// Distance in nodes to the nearest non-periodic face.
    pub fn face_distance(&self, idx: usize) -> usize {
        let m = self.multi(idx);
        let mut d = usize::MAX;
        for a in 0..self.n {
            if !self.periodic[a] {
                d = d.min(m[a]).min(self.shape[a] - 1 - m[a]);
            }
        }
        d
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        self.n == other.n
            && self.shape == other.shape
            && self.halfspace == other.halfspace
            && self.periodic == other.periodic
            && (self.h - other.h).abs() <= 1e-14 * self.h
            && self
                .origin
                .iter()
                .zip(&other.origin)
                .all(|(a, b)| (a - b).abs() <= 1e-12 * (1.0 + a.abs()))
    }

    pub fn require_same(&self, other: &Grid) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(LabError::GridMismatch(format!("{:?} vs {:?}", self.shape, other.shape)))
        }
    }

    /// The whole-space grid obtained by mirroring a half-space grid across x_n = 0.
    pub fn mirrored(&self) -> Result<Grid> {
        if !self.halfspace {
            return Err(LabError::InvalidArgument("mirroring needs a half-space grid".into()));
        }
        let mut shape = self.shape.clone();
        let n = self.n;
        shape[n - 1] = 2 * self.shape[n - 1] - 1;
        let mut origin = self.origin.clone();
        origin[n - 1] = -((self.shape[n - 1] - 1) as f64) * self.h;
        Grid::with_periodic(n, shape, origin, self.h, false, self.periodic.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_invalid_grids() {
        assert!(Grid::new(2, vec![3, 5], vec![0.0, 0.0], 0.1, false).is_err());
        assert!(Grid::new(2, vec![5, 5], vec![0.0, 0.0], 0.0, false).is_err());
        assert!(Grid::new(2, vec![5, 5], vec![0.0, 0.5], 0.1, true).is_err());
        assert!(Grid::new(4, vec![5; 4], vec![0.0; 4], 0.1, false).is_err());
        assert!(Grid::new(3, vec![5; 3], vec![0.0; 3], 0.1, true).is_ok());
    }

    #[test]
    fn index_round_trip_and_neighbors() {
        let g = Grid::with_periodic(3, vec![4, 5, 6], vec![0.0; 3], 0.5, false, vec![true, false, false]).unwrap();
        for idx in 0..g.len() {
            assert_eq!(g.index(&g.multi(idx)), idx);
        }
        let idx = g.index(&[0, 2, 3]);
        assert_eq!(g.neighbor(idx, 0, -1), Some(g.index(&[3, 2, 3])));
        assert_eq!(g.neighbor(idx, 2, 3), None);
        assert_eq!(g.neighbor(idx, 1, 1), Some(g.index(&[0, 3, 3])));
    }

    #[test]
    fn mirrored_grid_is_symmetric() {
        let g = Grid::new(2, vec![8, 5], vec![0.0, 0.0], 0.25, true).unwrap();
        let m = g.mirrored().unwrap();
        assert_eq!(m.shape, vec![8, 9]);
        assert_eq!(m.origin[1], -1.0);
        assert_eq!(m.coord(1, 8), 1.0);
    }
}
