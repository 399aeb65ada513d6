//! Borell-Brascamp-Lieb deficits, their optimal-transport lower bounds and
//! equality diagnostics on Euclidean space, constant-curvature model spaces
//! and Minkowski planes.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bbl;
pub mod error;
pub mod finsler;
pub mod fixtures;
pub mod gap;
pub mod grid;
pub mod modelspace;
pub mod ot;
pub mod pmeans;
pub mod report;
pub mod sets;

pub use error::{Error, Result};
pub use pmeans::Exponent;
