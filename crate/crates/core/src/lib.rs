//! Harmonic analysis of (n,n)-type functions on SL(2,R).
//!
//! The crate is organised bottom-up: matrix geometry and special functions,
//! then spherical functions and the c-function, the Harish-Chandra series,
//! spectral transforms, Lorentz-space diagnostics and finally
//! pseudo-differential operators and their kernels.

// `!(x > 0.0)` style guards are used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod group_geometry;
pub mod hc_expansion;
pub mod io;
pub mod lorentz;
pub mod plancherel;
pub mod psido;
pub mod quadrature;
pub mod special_functions;
pub mod spherical;
pub mod transforms;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Global factor multiplying the verbatim inversion formula.
///
/// Measured by the round trip of a smooth bump: with Haar measure
/// `Delta(t) dt dk1 dk2` and `int_K dk = 1`, the printed constants reproduce
/// `f / pi`. The same factor enters every kernel built from the inversion
/// formula.
pub const INVERSION_CALIBRATION: f64 = std::f64::consts::PI;
