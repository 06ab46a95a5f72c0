//! Numerical laboratory for charged and rotating black holes in de Sitter space:
//! horizon structure, phase-space flow of null geodesics, scalar waves in the
//! exterior and between the event and Cauchy horizons, and decay fits.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod bflow;
pub mod numerics;
pub mod par;
pub mod spacetime;
pub mod waves;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
