use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::bump::{BumpKernel, DEFAULT_MAX_ORDER};
use super::poly;

/// A compactly supported smooth function with exact derivatives.
pub trait Smooth: Sync {
    fn deriv(&self, n: usize, x: f64) -> Result<f64>;
    /// Closed interval outside of which the function and its derivatives vanish.
    fn support(&self) -> (f64, f64);
    fn max_order(&self) -> usize;
}

/// `ψ(x) = P(x) · b((x - c)/r)` with the unit bump `b`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "TestFunctionParams", into = "TestFunctionParams")]
pub struct TestFunction {
    id: String,
    poly: Vec<f64>,
    center: f64,
    radius: f64,
    kernel: BumpKernel,
    poly_derivs: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunctionParams {
    pub id: String,
    pub poly: Vec<f64>,
    pub center: f64,
    pub radius: f64,
}

impl TryFrom<TestFunctionParams> for TestFunction {
    type Error = Error;
    fn try_from(p: TestFunctionParams) -> Result<Self> {
        TestFunction::new(p.id, p.poly, p.center, p.radius)
    }
}

impl From<TestFunction> for TestFunctionParams {
    fn from(t: TestFunction) -> Self {
        TestFunctionParams {
            id: t.id,
            poly: t.poly,
            center: t.center,
            radius: t.radius,
        }
    }
}

impl TestFunction {
    pub fn new(id: impl Into<String>, poly: Vec<f64>, center: f64, radius: f64) -> Result<Self> {
        Self::with_max_order(id, poly, center, radius, DEFAULT_MAX_ORDER)
    }

    pub fn with_max_order(
        id: impl Into<String>,
        poly: Vec<f64>,
        center: f64,
        radius: f64,
        max_order: usize,
    ) -> Result<Self> {
        if !center.is_finite() || poly.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain(
                "test function parameters must be finite".into(),
            ));
        }
        let kernel = BumpKernel::new(radius, max_order)?;
        let poly = if poly.is_empty() { vec![0.0] } else { poly };
        let poly_derivs = (0..poly.len())
            .map(|i| poly::derivative(&poly, i))
            .collect();
        Ok(Self {
            id: id.into(),
            poly,
            center,
            radius,
            kernel,
            poly_derivs,
        })
    }

    /// Even: `P ≡ 1`, centred at 0, radius 1.
    pub fn even() -> Self {
        Self::new("even", vec![1.0], 0.0, 1.0).expect("valid default")
    }

    /// Odd polynomial factor on a shifted support.
    pub fn odd_shifted() -> Self {
        Self::new("odd-shifted", vec![0.3, 1.0], 0.1, 1.1).expect("valid default")
    }

    /// No symmetry, all low Taylor coefficients non-zero.
    pub fn generic() -> Self {
        Self::new("generic", vec![1.0, 1.0, -0.5], 0.2, 1.5).expect("valid default")
    }

    pub fn defaults() -> Vec<TestFunction> {
        vec![Self::even(), Self::odd_shifted(), Self::generic()]
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn poly(&self) -> &[f64] {
        &self.poly
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// `ψ̌(x) = ψ(-x)`.
    pub fn reflected(&self) -> TestFunction {
        let poly = self
            .poly
            .iter()
            .enumerate()
            .map(|(k, &c)| if k % 2 == 1 { -c } else { c })
            .collect();
        TestFunction::with_max_order(
            format!("{}~reflected", self.id),
            poly,
            -self.center,
            self.radius,
            self.kernel.max_order(),
        )
        .expect("reflection keeps parameters valid")
    }

    /// `a ψ` with the same support.
    pub fn scaled(&self, a: f64) -> TestFunction {
        TestFunction::with_max_order(
            format!("{a}*{}", self.id),
            self.poly.iter().map(|c| a * c).collect(),
            self.center,
            self.radius,
            self.kernel.max_order(),
        )
        .expect("scaling keeps parameters valid")
    }

    pub fn eval(&self, n: usize, x: f64) -> Result<f64> {
        self.kernel.check_order(n)?;
        Ok(self.deriv_unchecked(n, x))
    }

    pub(crate) fn deriv_unchecked(&self, n: usize, x: f64) -> f64 {
        let y = x - self.center;
        if y.abs() >= self.radius {
            return 0.0;
        }
        let mut b = vec![0.0; n + 1];
        self.kernel.derivatives_into(y, &mut b);
        let mut acc = 0.0;
        for (i, d) in self.poly_derivs.iter().enumerate().take(n + 1) {
            acc += poly::binomial(n, i) * poly::eval(d, x) * b[n - i];
        }
        acc
    }

    /// Taylor coefficients `ψ^{(j)}(0)/j!` for `j < len`, by power-series arithmetic on
    /// `exp(-1/s(x))` with the quadratic `s(x) = 1 - ((x-c)/r)²`.
    pub fn taylor_at_zero(&self, len: usize) -> Vec<f64> {
        let r2 = self.radius * self.radius;
        let s0 = 1.0 - self.center * self.center / r2;
        if s0 <= 0.0 || len == 0 {
            return vec![0.0; len];
        }
        let s1 = 2.0 * self.center / r2;
        let s2 = -1.0 / r2;
        let mut inv = vec![0.0; len];
        inv[0] = 1.0 / s0;
        for k in 1..len {
            let mut acc = s1 * inv[k - 1];
            if k >= 2 {
                acc += s2 * inv[k - 2];
            }
            inv[k] = -acc / s0;
        }
        let g: Vec<f64> = inv.iter().map(|v| -v).collect();
        let mut e = vec![0.0; len];
        e[0] = g[0].exp();
        for k in 1..len {
            let acc: f64 = (1..=k).map(|i| i as f64 * g[i] * e[k - i]).sum();
            e[k] = acc / k as f64;
        }
        let mut out = poly::mul(&self.poly, &e);
        out.truncate(len);
        out
    }

    /// Distance from 0 to the nearest end of the support, or 0 when 0 lies outside.
    pub(crate) fn interior_margin(&self) -> f64 {
        (self.radius - self.center.abs()).max(0.0)
    }
}

impl Smooth for TestFunction {
    fn deriv(&self, n: usize, x: f64) -> Result<f64> {
        self.eval(n, x)
    }

    fn support(&self) -> (f64, f64) {
        (self.center - self.radius, self.center + self.radius)
    }

    fn max_order(&self) -> usize {
        self.kernel.max_order()
    }
}

/// The `k`-th derivative of another smooth function.
#[derive(Debug, Clone, Copy)]
pub struct Derivative<'a, S: Smooth>(pub &'a S, pub usize);

impl<S: Smooth> Smooth for Derivative<'_, S> {
    fn deriv(&self, n: usize, x: f64) -> Result<f64> {
        self.0.deriv(n + self.1, x)
    }

    fn support(&self) -> (f64, f64) {
        self.0.support()
    }

    fn max_order(&self) -> usize {
        self.0.max_order().saturating_sub(self.1)
    }
}
