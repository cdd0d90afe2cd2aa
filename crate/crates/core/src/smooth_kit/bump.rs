use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};

use super::poly;

pub const DEFAULT_MAX_ORDER: usize = 12;

/// The bump `b(x) = exp(-1/(1-(x/l)²))` on `|x| < l`, zero elsewhere.
///
/// Derivatives are `l^{-n} R_n(t) (1-t²)^{-2n} b` with `t = x/l`, where the integer
/// polynomials `R_n` follow `R_{n+1} = R_n' (1-t²)² + 4n t R_n (1-t²) - 2t R_n`.
#[derive(Debug, Clone)]
pub struct BumpKernel {
    radius: f64,
    max_order: usize,
    exact: Vec<Vec<BigInt>>,
    tables: Vec<Vec<f64>>,
}

fn next_poly(r: &[BigInt], n: usize) -> Vec<BigInt> {
    let deg = r.len() + 3;
    let mut out = vec![BigInt::zero(); deg];
    let four_n = BigInt::from(4 * n as i64);
    for (k, c) in r.iter().enumerate() {
        // R' (1 - 2t² + t⁴)
        if k >= 1 {
            let d = c * BigInt::from(k as i64);
            out[k - 1] += &d;
            out[k + 1] -= &d * 2;
            out[k + 3] += &d;
        }
        // 4n t R (1 - t²) - 2t R
        out[k + 1] += c * &four_n - c * 2;
        out[k + 3] -= c * &four_n;
    }
    while out.len() > 1 && out.last().is_some_and(Zero::is_zero) {
        out.pop();
    }
    out
}

impl BumpKernel {
    pub fn new(radius: f64, max_order: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Domain(format!(
                "bump radius must be positive, got {radius}"
            )));
        }
        let mut exact = vec![vec![BigInt::from(1)]];
        for n in 0..max_order {
            let next = next_poly(&exact[n], n);
            exact.push(next);
        }
        let tables = exact
            .iter()
            .map(|p| p.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect())
            .collect();
        Ok(Self {
            radius,
            max_order,
            exact,
            tables,
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// Exact integer coefficients of `R_n` in the variable `t = x/l`.
    pub fn recurrence_poly(&self, n: usize) -> Option<&[BigInt]> {
        self.exact.get(n).map(Vec::as_slice)
    }

    pub fn eval(&self, n: usize, x: f64) -> Result<f64> {
        self.check_order(n)?;
        let mut out = vec![0.0; n + 1];
        self.derivatives_into(x, &mut out);
        Ok(out[n])
    }

    pub(crate) fn check_order(&self, n: usize) -> Result<()> {
        if n > self.max_order {
            Err(Error::UnsupportedOrder {
                order: n,
                max: self.max_order,
            })
        } else {
            Ok(())
        }
    }

    /// Fills `out[k]` with `b^{(k)}(x)` for `k < out.len()`; the caller guarantees the
    /// orders are within range.
    pub(crate) fn derivatives_into(&self, x: f64, out: &mut [f64]) {
        let t = x / self.radius;
        let u = (1.0 - t) * (1.0 + t);
        if u <= 0.0 {
            out.fill(0.0);
            return;
        }
        let base = (-1.0 / u).exp();
        if base == 0.0 {
            out.fill(0.0);
            return;
        }
        let inv_u2 = 1.0 / (u * u);
        let inv_l = 1.0 / self.radius;
        let mut factor = base;
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = poly::eval(&self.tables[k], t) * factor;
            factor *= inv_u2 * inv_l;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_at_center_and_outside() {
        let b = BumpKernel::new(1.0, DEFAULT_MAX_ORDER).unwrap();
        assert!((b.eval(0, 0.0).unwrap() - (-1.0f64).exp()).abs() < 1e-16);
        assert_eq!(b.eval(0, 1.5).unwrap(), 0.0);
        assert_eq!(b.eval(5, -1.0).unwrap(), 0.0);
        assert_eq!(b.eval(3, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn low_order_polynomials() {
        let b = BumpKernel::new(1.0, 3).unwrap();
        // b' = -2t (1-t²)^{-2} b
        let r1: Vec<i64> = b
            .recurrence_poly(1)
            .unwrap()
            .iter()
            .map(|c| c.to_i64().unwrap())
            .collect();
        assert_eq!(r1, vec![0, -2]);
        // b'' = (6t⁴ - 2) (1-t²)^{-4} b
        let r2: Vec<i64> = b
            .recurrence_poly(2)
            .unwrap()
            .iter()
            .map(|c| c.to_i64().unwrap())
            .collect();
        assert_eq!(r2, vec![-2, 0, 0, 0, 6]);
    }

    #[test]
    fn order_guard() {
        let b = BumpKernel::new(1.0, 4).unwrap();
        assert!(matches!(
            b.eval(5, 0.0),
            Err(Error::UnsupportedOrder { order: 5, max: 4 })
        ));
        assert!(BumpKernel::new(0.0, 4).is_err());
    }

    #[test]
    fn even_and_odd_derivatives() {
        let b = BumpKernel::new(1.3, DEFAULT_MAX_ORDER).unwrap();
        for n in 0..=8 {
            for &x in &[0.1, 0.57, 1.02] {
                let s = if n % 2 == 0 { 1.0 } else { -1.0 };
                let l = b.eval(n, x).unwrap();
                let r = b.eval(n, -x).unwrap();
                assert!((l - s * r).abs() <= 1e-12 * l.abs().max(1.0), "n={n} x={x}");
            }
        }
    }

    #[test]
    fn third_derivative_matches_finite_differences() {
        let b = BumpKernel::new(1.0, DEFAULT_MAX_ORDER).unwrap();
        let x = 0.4;
        let exact = b.eval(3, x).unwrap();
        // Central differences of the exact second derivative, Richardson-combined over a step sweep.
        let fd = |h: f64| (b.eval(2, x + h).unwrap() - b.eval(2, x - h).unwrap()) / (2.0 * h);
        let best = [1e-2, 5e-3, 2.5e-3, 1.25e-3]
            .iter()
            .map(|&h| (4.0 * fd(h / 2.0) - fd(h)) / 3.0)
            .map(|v| ((v - exact) / exact).abs())
            .fold(f64::INFINITY, f64::min);
        assert!(best < 1e-6, "relative error {best}");
    }
}
