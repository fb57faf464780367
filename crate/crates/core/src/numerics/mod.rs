//! Numeric kernels shared by the analytic layer and the optimizers.

mod lambert;
mod quadrature;
mod roots;

pub use lambert::{lambert_w0, lambert_w_minus1};
pub use quadrature::{integrate, integrate_radial};
pub use roots::{find_root, Bracket};

/// Residual tolerance used by every root solve in the crate.
pub const ROOT_TOL: f64 = 1e-10;
