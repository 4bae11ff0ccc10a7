//! Time-analyticity laboratory for divergence-form parabolic equations and
//! the Navier-Stokes system in the half space.

pub mod diagnostics;
pub mod error;
pub mod extension;
pub mod harness;
pub mod kernels;
pub mod mild;
pub mod numerics;
pub mod parabolic;
pub mod projection;

pub use error::{LabError, Result};
