//! Configuration of a single mild Navier-Stokes solve (`lab solve-ns`).

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::DataRef;
use crate::error::{LabError, Result};
use crate::mild::{chebyshev_nodes, graded_nodes, merge_nodes, picard_solve, random_divfree, shear_data, Forcing, KernelBounds, MildProblem, MildSolution};
use crate::numerics::io::read_field;
use crate::projection::halfspace_grid;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NsConfig {
    /// Initial velocity: a field file, or the generator `shear` / `random-divfree`.
    pub u0: DataRef,
    /// Generator grid: spacing, tangential nodes, normal nodes.
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default = "default_nt")]
    pub nt: usize,
    #[serde(default = "default_nn")]
    pub nn: usize,
    /// Shear amplitude and width; random-field amplitude, bump count and seed.
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_a")]
    pub a: f64,
    #[serde(default)]
    pub amp: Option<f64>,
    #[serde(default = "default_bumps")]
    pub bumps: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    /// Graded intervals `t_i = T (i / m)^2`.
    #[serde(default = "default_graded")]
    pub graded: usize,
    /// Extra Chebyshev-Lobatto window `(a, b, count)` merged into the nodes.
    #[serde(default)]
    pub window: Option<(f64, f64, usize)>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub max_iter: Option<usize>,
    #[serde(default)]
    pub bounds: Option<KernelBounds>,
}

fn default_h() -> f64 {
    0.125
}
fn default_nt() -> usize {
    32
}
fn default_nn() -> usize {
    41
}
fn default_eps() -> f64 {
    0.2
}
fn default_a() -> f64 {
    0.1
}
fn default_bumps() -> usize {
    3
}
fn default_t_end() -> f64 {
    0.2
}
fn default_graded() -> usize {
    10
}

impl NsConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: NsConfig = serde_json::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
        let mut c: NsConfig = serde_json::from_str(&text).map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
        if let DataRef::File { file } = &mut c.u0 {
            if file.is_relative() {
                *file = path.parent().unwrap_or(Path::new(".")).join(&*file);
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        match &self.u0 {
            DataRef::File { file } if !file.is_file() => return Err(LabError::Config(format!("field file {} does not exist", file.display()))),
            DataRef::Generator { generator } if generator != "shear" && generator != "random-divfree" => {
                return Err(LabError::Config(format!("unknown velocity generator {generator:?}")))
            }
            _ => {}
        }
        let positive = [("h", self.h), ("t_end", self.t_end), ("eps", self.eps), ("a", self.a)];
        if let Some((k, v)) = positive.iter().find(|(_, v)| !(v.is_finite() && *v > 0.0)) {
            return Err(LabError::Config(format!("{k} must be positive, got {v}")));
        }
        if self.tol.map_or(false, |t| !(t > 0.0)) {
            return Err(LabError::Config("tol must be positive".into()));
        }
        if self.graded < 2 {
            return Err(LabError::Config("graded needs at least 2 intervals".into()));
        }
        if let Some((a, b, c)) = self.window {
            if !(0.0 < a && a < b && b <= self.t_end) || c < 3 {
                return Err(LabError::Config("window must satisfy 0 < a < b <= t_end with at least 3 nodes".into()));
            }
        }
        Ok(())
    }

    pub fn times(&self) -> Vec<f64> {
        let g = graded_nodes(self.t_end, self.graded);
        match self.window {
            Some((a, b, c)) => merge_nodes(&[&g, &chebyshev_nodes(a, b, c)]),
            None => g,
        }
    }

    pub fn problem(&self) -> Result<MildProblem> {
        let bounds = match self.bounds {
            Some(b) => b,
            None => KernelBounds::measured(2)?,
        };
        let u0 = match &self.u0 {
            DataRef::File { file } => read_field(file)?,
            DataRef::Generator { generator } => {
                let g = halfspace_grid(2, self.nt, self.nn, self.h)?;
                if generator == "shear" {
                    shear_data(&g, self.eps, self.a)
                } else {
                    let amp = self.amp.unwrap_or(0.9 / (8.0 * bounds.c * bounds.c0 * self.t_end.sqrt()));
                    random_divfree(&g, self.bumps, amp, self.seed)
                }
            }
        };
        let mut p = MildProblem::new(u0, Forcing::Zero, self.times(), bounds);
        if let Some(t) = self.tol {
            p.tol = t;
        }
        if let Some(m) = self.max_iter {
            p.max_iter = m;
        }
        Ok(p)
    }
}

pub fn solve_ns(cfg: &NsConfig) -> Result<MildSolution> {
    picard_solve(&cfg.problem()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_validation() {
        let c = NsConfig::from_json(r#"{"u0":{"generator":"shear"},"window":[0.05,0.2,28]}"#).unwrap();
        assert_eq!(c.times().len(), 37);
        assert!(NsConfig::from_json(r#"{"u0":{"generator":"vortex"}}"#).is_err());
        assert!(NsConfig::from_json(r#"{"u0":{"file":"/missing.field"}}"#).unwrap_err().to_string().contains("/missing.field"));
        assert!(NsConfig::from_json(r#"{"u0":{"generator":"shear"},"window":[0.1,0.3,9]}"#).is_err());
    }
}
