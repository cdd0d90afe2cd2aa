use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

/// `σ_p = Σ_{k=1}^p 1/k` held exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HarmonicValue {
    pub p: u32,
    pub value: BigRational,
}

pub fn harmonic(p: u32) -> HarmonicValue {
    let mut value = BigRational::zero();
    for k in 1..=p {
        value += BigRational::new(BigInt::from(1), BigInt::from(k));
    }
    HarmonicValue { p, value }
}

/// `σ_p` as a float.
pub fn sigma(p: u32) -> f64 {
    harmonic(p).value.to_f64().unwrap_or(f64::NAN)
}
