use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate, QuadConfig};

use super::bump::{BumpKernel, DEFAULT_MAX_ORDER};
use super::poly;

/// Highest raw moment `∫ x^i φ` kept for far-field expansions of convolutions.
pub(crate) const RAW_MOMENTS: usize = 48;

/// Largest moment order the fitter accepts.
pub const MAX_FIT_ORDER: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Polynomial times the bump.
    Plain,
    /// Polynomial times `(1 + x²/4)` times the bump.
    Weighted,
}

impl Variant {
    fn weight(self) -> Vec<f64> {
        match self {
            Variant::Plain => vec![1.0],
            Variant::Weighted => vec![1.0, 0.0, 0.25],
        }
    }

    pub fn default_radius(self) -> f64 {
        match self {
            Variant::Plain => 1.0,
            Variant::Weighted => 1.3,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::Plain => f.write_str("plain"),
            Variant::Weighted => f.write_str("weighted"),
        }
    }
}

/// A mollifier `φ = P · w · b` in `A_q(ℝ)`: `∫ x^j φ = δ_{0j}` for `j ≤ q`.
#[derive(Debug, Clone)]
pub struct MollifierSpec {
    order: usize,
    variant: Variant,
    kernel: BumpKernel,
    poly_coeffs: Vec<BigRational>,
    // P · w, expanded; `derivs[i]` holds the coefficients of its i-th derivative.
    derivs: Vec<Vec<f64>>,
    moment_residuals: Vec<f64>,
    raw_moments: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MollifierSummary {
    pub id: String,
    pub variant: Variant,
    pub order: usize,
    pub support: f64,
    pub poly_coeffs: Vec<String>,
    pub residuals: Vec<f64>,
}

fn solve_exact(matrix: Vec<Vec<BigRational>>, rhs: Vec<BigRational>) -> Result<Vec<BigRational>> {
    let n = rhs.len();
    let mut a = matrix;
    let mut b = rhs;
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !a[r][col].is_zero())
            .ok_or_else(|| Error::Fit("singular moment matrix".into()))?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        for r in (col + 1)..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &a[col][col];
            let (upper, lower) = a.split_at_mut(r);
            for (x, y) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                *x -= &f * y;
            }
            let delta = &f * &b[col];
            b[r] -= delta;
        }
    }
    let mut x = vec![BigRational::zero(); n];
    for r in (0..n).rev() {
        let mut acc = b[r].clone();
        for c in (r + 1)..n {
            acc -= &a[r][c] * &x[c];
        }
        x[r] = acc / &a[r][r];
    }
    Ok(x)
}

fn to_rational(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::Fit(format!("non-finite moment {x}")))
}

/// Fits the degree-`q` polynomial so the resulting kernel lies in `A_q(ℝ)`.
///
/// Bump moments come from adaptive quadrature; the Hankel system is then solved exactly
/// over the rationals so the residuals reflect quadrature error only.
pub fn fit_mollifier(q: usize, radius: f64, variant: Variant) -> Result<MollifierSpec> {
    fit_with_max_order(q, radius, variant, DEFAULT_MAX_ORDER)
}

pub(crate) fn fit_with_max_order(
    q: usize,
    radius: f64,
    variant: Variant,
    max_order: usize,
) -> Result<MollifierSpec> {
    if q > MAX_FIT_ORDER {
        return Err(Error::Fit(format!(
            "moment order {q} exceeds maximum {MAX_FIT_ORDER}"
        )));
    }
    let kernel = BumpKernel::new(radius, max_order)?;
    let weight = variant.weight();
    let cfg = QuadConfig::with_tolerances(1e-14, 1e-300);
    let weighted = |x: f64| {
        let mut b = [0.0];
        kernel.derivatives_into(x, &mut b);
        poly::eval(&weight, x) * b[0]
    };
    let mut base = Vec::with_capacity(2 * q + 1);
    for n in 0..=2 * q {
        let r = integrate(
            |x: f64| x.powi(n as i32) * weighted(x),
            -radius,
            radius,
            &cfg,
        )?;
        base.push(to_rational(r.re())?);
    }
    let matrix = (0..=q)
        .map(|j| (0..=q).map(|k| base[j + k].clone()).collect())
        .collect();
    let mut rhs = vec![BigRational::zero(); q + 1];
    rhs[0] = BigRational::one();
    let poly_coeffs = solve_exact(matrix, rhs)?;
    let c: Vec<f64> = poly_coeffs
        .iter()
        .map(|r| r.to_f64().unwrap_or(f64::NAN))
        .collect();
    if c.iter().any(|v| !v.is_finite()) {
        return Err(Error::Fit("fitted coefficients are not finite".into()));
    }
    let full = poly::mul(&c, &weight);
    let derivs = (0..full.len())
        .map(|i| poly::derivative(&full, i))
        .collect();
    let mut spec = MollifierSpec {
        order: q,
        variant,
        kernel,
        poly_coeffs,
        derivs,
        moment_residuals: Vec::new(),
        raw_moments: Vec::new(),
    };
    let mut raw = Vec::with_capacity(RAW_MOMENTS + 1);
    for i in 0..=RAW_MOMENTS {
        let r = integrate(
            |x: f64| x.powi(i as i32) * spec.phi(x),
            -radius,
            radius,
            &cfg,
        )?;
        raw.push(r.re());
    }
    spec.moment_residuals = (0..=q)
        .map(|j| (raw[j] - if j == 0 { 1.0 } else { 0.0 }).abs())
        .collect();
    spec.raw_moments = raw;
    Ok(spec)
}

impl MollifierSpec {
    /// The two standard independent kernels for moment order `q`.
    pub fn default_variants(q: usize) -> Result<[MollifierSpec; 2]> {
        Ok([
            fit_mollifier(q, Variant::Plain.default_radius(), Variant::Plain)?,
            fit_mollifier(q, Variant::Weighted.default_radius(), Variant::Weighted)?,
        ])
    }

    pub fn standard(q: usize, variant: Variant) -> Result<MollifierSpec> {
        fit_mollifier(q, variant.default_radius(), variant)
    }

    pub fn id(&self) -> String {
        format!("{}-l{}-q{}", self.variant, self.kernel.radius(), self.order)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn kernel(&self) -> &BumpKernel {
        &self.kernel
    }

    pub fn support(&self) -> f64 {
        self.kernel.radius()
    }

    pub fn poly_coeffs(&self) -> &[BigRational] {
        &self.poly_coeffs
    }

    pub fn moment_residuals(&self) -> &[f64] {
        &self.moment_residuals
    }

    /// `∫ x^i φ(x) dx` for `i ≤ 48`.
    pub fn raw_moments(&self) -> &[f64] {
        &self.raw_moments
    }

    /// Highest derivative order of `φ` that `mollifier_eval` accepts.
    pub fn max_derivative(&self) -> usize {
        self.kernel.max_order().saturating_sub(self.order)
    }

    /// `ε^{-1-n} φ^{(n)}(x/ε)`; `eps = 1` gives the unscaled derivative.
    pub fn eval(&self, eps: f64, n: usize, x: f64) -> Result<f64> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::Domain(format!("scale must be positive, got {eps}")));
        }
        if n > self.max_derivative() {
            return Err(Error::UnsupportedOrder {
                order: n,
                max: self.max_derivative(),
            });
        }
        Ok(self.phi_deriv(n, x / eps) / eps.powi(n as i32 + 1))
    }

    pub(crate) fn phi(&self, x: f64) -> f64 {
        self.phi_deriv(0, x)
    }

    /// Unchecked `φ^{(n)}(x)` through the Leibniz rule; `n` must not exceed the kernel order.
    pub(crate) fn phi_deriv(&self, n: usize, x: f64) -> f64 {
        if x.abs() >= self.kernel.radius() {
            return 0.0;
        }
        let mut b = [0.0; DEFAULT_MAX_ORDER + 8];
        let mut heap;
        let slots: &mut [f64] = if n < b.len() {
            &mut b[..=n]
        } else {
            heap = vec![0.0; n + 1];
            &mut heap
        };
        self.kernel.derivatives_into(x, slots);
        let mut acc = 0.0;
        for (i, d) in self.derivs.iter().enumerate().take(n + 1) {
            if d.is_empty() {
                break;
            }
            acc += poly::binomial(n, i) * poly::eval(d, x) * slots[n - i];
        }
        acc
    }

    pub fn summary(&self) -> MollifierSummary {
        MollifierSummary {
            id: self.id(),
            variant: self.variant,
            order: self.order,
            support: self.support(),
            poly_coeffs: self
                .poly_coeffs
                .iter()
                .map(|r| format!("{}", r.to_f64().unwrap_or(f64::NAN)))
                .collect(),
            residuals: self.moment_residuals.clone(),
        }
    }

    /// Exact rational coefficient as `numerator/denominator`.
    pub fn exact_coeff(&self, j: usize) -> Option<(BigInt, BigInt)> {
        self.poly_coeffs
            .get(j)
            .map(|r| (r.numer().clone(), r.denom().clone()))
    }
}
