//! Compactly supported smooth kernels: the bump, moment-fitted mollifiers in `A_q(ℝ)`,
//! and test functions, all with exact derivatives of every supported order.

mod bump;
mod mollifier;
pub(crate) mod poly;
mod test_function;

pub use bump::{BumpKernel, DEFAULT_MAX_ORDER};
pub use mollifier::{fit_mollifier, MollifierSpec, MollifierSummary, Variant, MAX_FIT_ORDER};
pub use test_function::{Derivative, Smooth, TestFunction, TestFunctionParams};
