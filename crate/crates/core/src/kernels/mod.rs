//! Kernels of the heat and Stokes problems in the half space.

pub mod fourier;
pub mod green;
pub mod hat;
pub mod heat;
pub mod laplace;
pub mod norms;

pub use green::{eval_g, eval_g_deriv, eval_g_route, eval_k, eval_query, KernelId, KernelQuery, QuadratureSpec, Route};
pub use heat::eval_gamma;
pub use laplace::{eval_e, eval_n, Sign};
