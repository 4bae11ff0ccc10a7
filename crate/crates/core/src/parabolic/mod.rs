//! Divergence-form parabolic problems on whole-space boxes: time marching,
//! exact time-derivative ladders, ratio audits and derivative-growth fits.

mod audit;
mod growth;
mod ladder;
mod solver;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::numerics::Field;

pub use audit::{audit_caccioppoli, audit_local_boundedness, audit_time_derivative, gradient_series};
pub use growth::{growth_fit, taylor_errors, taylor_reconstruct, GrowthFit};
pub use ladder::{derivative_ladder, DerivativeLadder};
pub use solver::{solve, solve_with_boundary};

/// `m`-th time derivative of the flux `f` at time `t`, as a vector field.
pub type ForcingFn = Arc<dyn Fn(usize, f64) -> Field + Send + Sync>;

#[derive(Clone, Default)]
pub enum Forcing {
    #[default]
    None,
    Given(ForcingFn),
}

impl Forcing {
    pub fn at(&self, m: usize, t: f64) -> Option<Field> {
        match self {
            Forcing::None => None,
            Forcing::Given(f) => Some(f(m, t)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Scheme {
    /// theta = 1/2
    CrankNicolson,
    Theta(f64),
    Explicit,
}

impl Scheme {
    pub fn theta(&self) -> f64 {
        match self {
            Scheme::CrankNicolson => 0.5,
            Scheme::Theta(t) => *t,
            Scheme::Explicit => 0.0,
        }
    }
}

/// Growth constants of the data: |u| <= A1 exp(A2 |x|^2) and
/// |d_t^k f| <= A1 C^k k^k exp(A2 |x|^2).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthConstants {
    pub a1: f64,
    pub a2: f64,
    pub c: f64,
}

impl Default for GrowthConstants {
    fn default() -> Self {
        GrowthConstants { a1: 1.0, a2: 0.0, c: 1.0 }
    }
}

#[derive(Clone)]
pub struct ParabolicProblem {
    /// time-independent coefficient tensor
    pub a: Field,
    pub forcing: Forcing,
    pub u_init: Field,
    pub t_start: f64,
    pub t_end: f64,
    pub dt: f64,
    pub scheme: Scheme,
    pub growth: GrowthConstants,
    /// keep every `save_every`-th step (the last step is always kept)
    pub save_every: usize,
}

impl ParabolicProblem {
    pub fn new(a: Field, u_init: Field, t_start: f64, t_end: f64, dt: f64) -> Self {
        ParabolicProblem {
            a,
            forcing: Forcing::None,
            u_init,
            t_start,
            t_end,
            dt,
            scheme: Scheme::CrankNicolson,
            growth: GrowthConstants::default(),
            save_every: 1,
        }
    }
}
