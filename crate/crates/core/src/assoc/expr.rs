use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dist_core::{DistTerm, LinearCombo};
use crate::embedding::{EmbeddedProduct, EmbeddedSummand, Embedder, TermRep};
use crate::error::{Error, Result};

/// `coeff · x^monomial · Π factors`, at most two factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summand {
    pub coeff: Complex64,
    pub factors: Vec<DistTerm>,
    #[serde(default)]
    pub monomial: u32,
}

/// A finite sum of products of embedded distributions.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ProductExpr {
    summands: Vec<Summand>,
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

impl ProductExpr {
    pub fn new(summands: Vec<Summand>) -> Result<Self> {
        for s in &summands {
            if s.factors.len() > 2 {
                return Err(Error::Domain(format!(
                    "a summand may carry at most two factors, got {}",
                    s.factors.len()
                )));
            }
            for t in &s.factors {
                t.validate()?;
            }
        }
        Ok(Self { summands })
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// `c · a · b`.
    pub fn pair(c: f64, a: DistTerm, b: DistTerm) -> Self {
        Self {
            summands: vec![Summand {
                coeff: Complex64::new(c, 0.0),
                factors: vec![a, b],
                monomial: 0,
            }],
        }
    }

    /// `c · x^m · t`.
    pub fn monomial_times(c: f64, m: u32, t: DistTerm) -> Self {
        Self {
            summands: vec![Summand {
                coeff: Complex64::new(c, 0.0),
                factors: vec![t],
                monomial: m,
            }],
        }
    }

    /// Bilinear expansion of `u · v`.
    pub fn product(u: &LinearCombo, v: &LinearCombo) -> Self {
        let mut summands = Vec::new();
        for &(a, s) in u.terms() {
            for &(b, t) in v.terms() {
                summands.push(Summand {
                    coeff: a * b,
                    factors: vec![s, t],
                    monomial: 0,
                });
            }
        }
        Self { summands }
    }

    pub fn summands(&self) -> &[Summand] {
        &self.summands
    }

    pub fn add(&self, other: &ProductExpr) -> Self {
        let mut summands = self.summands.clone();
        summands.extend_from_slice(&other.summands);
        Self { summands }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            summands: self
                .summands
                .iter()
                .map(|s| Summand {
                    coeff: c * s.coeff,
                    ..s.clone()
                })
                .collect(),
        }
    }

    pub fn sub(&self, other: &ProductExpr) -> Self {
        self.add(&other.scale(-one()))
    }

    /// Factors sorted, `x_±^0` written as `H`/`Ȟ`, like summands merged, zeros dropped.
    pub fn canonical(&self) -> Self {
        let mut acc: BTreeMap<(Vec<DistTerm>, u32), Complex64> = BTreeMap::new();
        for s in &self.summands {
            let mut f: Vec<DistTerm> = s.factors.iter().map(|t| t.canonical()).collect();
            f.sort();
            *acc.entry((f, s.monomial)).or_default() += s.coeff;
        }
        Self {
            summands: acc
                .into_iter()
                .filter(|(_, c)| c.norm() != 0.0)
                .map(|((factors, monomial), coeff)| Summand {
                    coeff,
                    factors,
                    monomial,
                })
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.canonical().summands.is_empty()
    }

    /// Canonical forms agree coefficient-wise to relative `tol`.
    pub fn approx_eq(&self, other: &ProductExpr, tol: f64) -> bool {
        let scale = self
            .summands
            .iter()
            .chain(&other.summands)
            .map(|s| s.coeff.norm())
            .fold(1.0, f64::max);
        let diff = self.sub(other).canonical();
        diff.summands.iter().all(|s| s.coeff.norm() <= tol * scale)
    }

    /// Leibniz rule with the exact distributional derivative of every factor.
    pub fn derivative(&self) -> Self {
        let mut out = Vec::new();
        for s in &self.summands {
            if s.monomial > 0 {
                out.push(Summand {
                    coeff: s.coeff * s.monomial as f64,
                    factors: s.factors.clone(),
                    monomial: s.monomial - 1,
                });
            }
            for i in 0..s.factors.len() {
                for &(c, d) in LinearCombo::single(s.factors[i]).derive().terms() {
                    let mut factors = s.factors.clone();
                    factors[i] = d;
                    out.push(Summand {
                        coeff: s.coeff * c,
                        factors,
                        monomial: s.monomial,
                    });
                }
            }
        }
        Self { summands: out }
    }

    /// Highest kernel derivative an embedding of this expression needs.
    pub fn max_kernel_order(&self) -> Result<usize> {
        let mut m = 0;
        for s in &self.summands {
            for &t in &s.factors {
                m = m.max(TermRep::new(t)?.kernel_order());
            }
        }
        Ok(m)
    }

    /// Embed every factor with one mollifier.
    pub fn bind(&self, emb: &Embedder) -> Result<EmbeddedProduct> {
        let mut summands = Vec::with_capacity(self.summands.len());
        for s in &self.summands {
            let factors = s
                .factors
                .iter()
                .map(|&t| TermRep::new(t))
                .collect::<Result<Vec<_>>>()?;
            summands.push(EmbeddedSummand {
                coeff: s.coeff,
                factors,
                monomial: s.monomial,
            });
        }
        EmbeddedProduct::new(emb.clone(), summands)
    }
}

impl fmt::Display for ProductExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.summands.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .summands
            .iter()
            .map(|s| {
                let c = if s.coeff.im == 0.0 {
                    format!("{}", s.coeff.re)
                } else {
                    format!("{}", s.coeff)
                };
                let mut body: Vec<String> = Vec::new();
                if s.monomial > 0 {
                    body.push(format!("x^{}", s.monomial));
                }
                body.extend(s.factors.iter().map(|t| format!("[{t}]")));
                if body.is_empty() {
                    body.push("1".into());
                }
                format!("({c})·{}", body.join("·"))
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use DistTerm::*;

    #[test]
    fn canonical_merges_and_sorts() {
        let e = ProductExpr::pair(1.0, DeltaDeriv(0), XPow(-1))
            .add(&ProductExpr::pair(1.0, XPow(-1), DeltaDeriv(0)))
            .add(&ProductExpr::pair(2.0, XPlusPow(0), LogAbs))
            .add(&ProductExpr::pair(-2.0, LogAbs, HeavisidePlus));
        let c = e.canonical();
        assert_eq!(c.summands().len(), 1);
        assert_eq!(c.summands()[0].coeff, Complex64::new(2.0, 0.0));
        assert_eq!(c.summands()[0].factors, vec![DeltaDeriv(0), XPow(-1)]);
    }

    #[test]
    fn leibniz_rule() {
        let d = ProductExpr::pair(1.0, XPow(-1), HeavisidePlus)
            .derivative()
            .canonical();
        let want = ProductExpr::pair(-1.0, XPow(-2), HeavisidePlus)
            .add(&ProductExpr::pair(1.0, XPow(-1), DeltaDeriv(0)))
            .canonical();
        assert_eq!(d, want);
        let m = ProductExpr::monomial_times(1.0, 2, HeavisidePlus)
            .derivative()
            .canonical();
        assert!(m.approx_eq(
            &ProductExpr::monomial_times(2.0, 1, HeavisidePlus).add(&ProductExpr::monomial_times(
                1.0,
                2,
                DeltaDeriv(0)
            )),
            0.0
        ));
        assert!(ProductExpr::zero().derivative().is_zero());
    }

    #[test]
    fn at_most_two_factors() {
        let s = Summand {
            coeff: one(),
            factors: vec![HeavisidePlus; 3],
            monomial: 0,
        };
        assert!(ProductExpr::new(vec![s]).is_err());
    }

    #[test]
    fn product_expansion() {
        let e = ProductExpr::product(
            &LinearCombo::x_plus_minus_i0(1, true),
            &LinearCombo::single(XPlusPow(1)),
        );
        assert_eq!(e.summands().len(), 2);
        assert_eq!(
            e.to_string(),
            format!(
                "(1)·[x^{{-2}}]·[x_+^{{1}}] + ({})·[delta^(1)]·[x_+^{{1}}]",
                e.summands()[1].coeff
            )
        );
    }
}
