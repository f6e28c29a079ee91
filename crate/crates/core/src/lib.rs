//! Domain variations of Robin energies and eigenvalues on balls and
//! nearly spherical domains, with an independent collocation oracle.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod oracle;
pub mod quadrature;
pub mod radial;
pub mod special;
pub mod steklov;
pub mod variations;

pub use error::{Error, Result};
