use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::smooth_kit::poly::factorial;

use super::term::{derive, reflect, DistTerm};

/// Finite complex combination of catalogue terms; the empty list is the zero distribution.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct LinearCombo {
    terms: Vec<(Complex64, DistTerm)>,
}

impl LinearCombo {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn single(t: DistTerm) -> Self {
        Self::from_real(vec![(1.0, t)])
    }

    pub fn from_real(terms: Vec<(f64, DistTerm)>) -> Self {
        Self {
            terms: terms
                .into_iter()
                .map(|(c, t)| (Complex64::new(c, 0.0), t))
                .collect(),
        }
    }

    pub fn from_terms(terms: Vec<(Complex64, DistTerm)>) -> Self {
        Self { terms }
    }

    /// `(x + i0)^{-p-1}` when `upper`, else `(x - i0)^{-p-1}`, expanded as
    /// `x^{-p-1} ∓ ((-1)^p iπ / p!) δ^{(p)}`.
    pub fn x_plus_minus_i0(p: u32, upper: bool) -> Self {
        let sgn = if p.is_multiple_of(2) { 1.0 } else { -1.0 };
        let mp = if upper { -1.0 } else { 1.0 };
        let c = Complex64::new(0.0, mp * sgn * PI / factorial(p as usize));
        Self::from_terms(vec![
            (Complex64::new(1.0, 0.0), DistTerm::XPow(-(p as i32) - 1)),
            (c, DistTerm::DeltaDeriv(p)),
        ])
    }

    pub fn terms(&self) -> &[(Complex64, DistTerm)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms
            .iter()
            .all(|(c, _)| *c == Complex64::new(0.0, 0.0))
    }

    pub fn scale(&self, a: Complex64) -> Self {
        Self::from_terms(self.terms.iter().map(|&(c, t)| (a * c, t)).collect())
    }

    pub fn add(&self, other: &LinearCombo) -> Self {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        Self { terms }
    }

    pub fn sub(&self, other: &LinearCombo) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Like terms merged (with `x_±^0` identified with `H`, `Ȟ`), zeros dropped,
    /// sorted by tag.
    pub fn canonical(&self) -> Self {
        let mut acc: BTreeMap<DistTerm, Complex64> = BTreeMap::new();
        for &(c, t) in &self.terms {
            *acc.entry(t.canonical()).or_default() += c;
        }
        Self {
            terms: acc
                .into_iter()
                .filter(|(_, c)| c.norm() != 0.0)
                .map(|(t, c)| (c, t))
                .collect(),
        }
    }

    /// Canonical forms agree to relative `tol` in every coefficient.
    pub fn approx_eq(&self, other: &LinearCombo, tol: f64) -> bool {
        let diff = self.sub(other).canonical();
        let scale = self
            .terms
            .iter()
            .chain(other.terms.iter())
            .map(|(c, _)| c.norm())
            .fold(1.0, f64::max);
        diff.terms.iter().all(|(c, _)| c.norm() <= tol * scale)
    }

    pub fn derive(&self) -> Self {
        let mut terms = Vec::new();
        for &(c, t) in &self.terms {
            for &(d, s) in derive(t).terms() {
                terms.push((c * d, s));
            }
        }
        Self { terms }
    }

    pub fn reflect(&self) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .map(|&(c, t)| {
                    let (s, r) = reflect(t);
                    (c * s, r)
                })
                .collect(),
        )
    }
}

fn fmt_coeff(c: Complex64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else if c.im.is_sign_negative() {
        format!("{}-{}i", c.re, -c.im)
    } else {
        format!("{}+{}i", c.re, c.im)
    }
}

fn parse_coeff(s: &str) -> Result<Complex64> {
    let bad = || Error::Parse(format!("bad coefficient `{s}`"));
    if let Some(body) = s.strip_suffix('i') {
        let bytes = body.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&i| {
                (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E')
            })
            .ok_or_else(bad)?;
        let re: f64 = body[..split].parse().map_err(|_| bad())?;
        let im: f64 = body[split..]
            .trim_start_matches('+')
            .parse()
            .map_err(|_| bad())?;
        Ok(Complex64::new(re, im))
    } else {
        Ok(Complex64::new(s.parse().map_err(|_| bad())?, 0.0))
    }
}

impl fmt::Display for LinearCombo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|&(c, t)| format!("({})·{}", fmt_coeff(c), t))
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

impl FromStr for LinearCombo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "0" {
            return Ok(Self::zero());
        }
        let mut terms = Vec::new();
        for part in s.split(" + ") {
            let part = part.trim();
            let (coeff, term) = part
                .strip_prefix('(')
                .and_then(|rest| rest.split_once(")·"))
                .ok_or_else(|| Error::Parse(format!("bad combination term `{part}`")))?;
            terms.push((parse_coeff(coeff)?, term.parse()?));
        }
        Ok(Self { terms })
    }
}

impl TryFrom<String> for LinearCombo {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<LinearCombo> for String {
    fn from(c: LinearCombo) -> String {
        c.to_string()
    }
}
