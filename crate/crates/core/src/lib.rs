//! Numerical checks of exponential-moment bounds for Gaussian vectors and
//! dyadic martingales: the Mills-ratio kernel and the special functions built
//! on it, Bellman-matrix and four-point checks, heat-flow monotone
//! quantities, and martingale simulations.

// NaN must fail every check, so `!(a >= b)` is deliberate throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]
pub mod error;
pub mod heat;
pub mod martingale;
pub mod quadrature;
pub mod special;
pub mod suites;
pub mod verify;

pub use error::{Error, Result};
pub use quadrature::QuadratureConfig;
