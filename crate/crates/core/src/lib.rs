//! Gabor frame bounds for B-spline windows.
//!
//! The crate evaluates B-splines exactly, samples Zak transforms and
//! Zibulski–Zeevi matrices to estimate frame bounds at rational oversampling,
//! builds painless alternate dual windows, and produces exact rational
//! certificates that a Gabor system `G(B_n, a, b)` is not a frame.

pub mod bspline;
pub mod error;
pub mod framesets;
pub mod linalg;
pub mod numerics;
mod painless;
pub mod poly;
pub mod scan;
pub mod zak;
pub mod zz;

pub use error::{Error, Result};
