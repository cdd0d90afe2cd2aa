//! Catalogue of the one-dimensional distributions `δ^{(p)}`, `H`, `x_±^k`, `x^{-p}` and
//! the logarithms, with their exact pairings against test functions and the symbolic
//! rules (derivative, reflection, decomposition) that relate them.

mod combo;
mod harmonic;
mod oracle;
mod term;

pub use combo::LinearCombo;
pub use harmonic::{harmonic, sigma, HarmonicValue};
pub use oracle::{continued_xplus_pairing, oracle_pair, oracle_pair_with, pair_term};
pub use term::{decompose_xpow, derive, reflect, DistTerm};
