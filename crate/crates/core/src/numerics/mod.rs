//! Grids, fields, the flux-form divergence operator, cylinder norms, field
//! files and the small numerical toolbox (special functions, quadrature,
//! Krylov solver) shared by the rest of the crate.

pub mod cylinder;
pub mod field;
pub mod grid;
pub mod io;
pub mod krylov;
pub mod ops;
pub mod quad;
pub mod special;

pub use cylinder::{cylinder_norm, window_norm, Cylinder, NormKind};
pub use field::{CoefficientAudit, Field, NodeKind, TimeSeries};
pub use grid::Grid;
pub use ops::{apply_divergence_form, DivergenceOperator};
