//! Numerical certification of balanced products of the singular distributions
//! `x_±^{-p}`, `x^{-p}` and `δ^{(p)}` in the Colombeau algebra on the real line.
//!
//! Distributions are embedded by convolution with a scaled, moment-fitted mollifier
//! (`smooth_kit`), paired against smooth test functions at a decreasing sequence of
//! scales (`quad`), and the scale-to-zero limit is extrapolated and compared with the
//! exact pairing of the predicted distribution (`assoc`, `dist_core`).

pub mod assoc;
pub mod cli;
pub mod dist_core;
pub mod embedding;
pub mod error;
pub mod quad;
pub mod smooth_kit;

pub use error::{Error, Result};
pub use num_complex::Complex64;
