//! Explicit constants and finite-dimensional certification for
//! Hardy–Lieb–Thirring inequalities of fractional Schrödinger operators
//! `(-Δ)^s - C_{s,d}|x|^{-2s} - V`.

// NaN-rejecting guards are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod brown_ravenhall;
pub mod convolution;
pub mod error;
pub mod hardy_constants;
pub mod lt_bounds;
pub mod quad;
pub mod remainder;
pub mod reports;
pub mod spectral;
pub mod specfun;
pub mod verdict;

pub use error::{Error, Result};
