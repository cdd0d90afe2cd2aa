use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::smooth_kit::poly::factorial;

use super::combo::LinearCombo;

/// A primitive distribution of the catalogue.
///
/// `XPlusPow(k)` and `XMinusPow(k)` cover every integer `k`: non-negative powers are
/// locally integrable, negative ones are the finite-part distributions. `XPow(k)` is
/// `x^k` for `k ≤ -1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum DistTerm {
    DeltaDeriv(u32),
    HeavisidePlus,
    HeavisideMinus,
    XPlusPow(i32),
    XMinusPow(i32),
    XPow(i32),
    LogPlus,
    LogMinus,
    LogAbs,
}

impl DistTerm {
    pub fn validate(self) -> Result<Self> {
        match self {
            DistTerm::XPow(k) if k >= 0 => Err(Error::Domain(format!(
                "x^{{{k}}} needs a negative exponent"
            ))),
            _ => Ok(self),
        }
    }

    /// `x_±^0` is `H` / `Ȟ`; everything else is unchanged.
    pub fn canonical(self) -> Self {
        match self {
            DistTerm::XPlusPow(0) => DistTerm::HeavisidePlus,
            DistTerm::XMinusPow(0) => DistTerm::HeavisideMinus,
            t => t,
        }
    }

    /// Highest test-function derivative the exact pairing needs.
    pub fn pairing_order(self) -> usize {
        match self {
            DistTerm::DeltaDeriv(p) => p as usize,
            DistTerm::XPlusPow(k) | DistTerm::XMinusPow(k) if k < 0 => (-k) as usize,
            DistTerm::XPow(k) => (-k) as usize,
            _ => 0,
        }
    }

    /// Every catalogue tag with singular orders up to `p_max`.
    pub fn catalogue(p_max: u32) -> Vec<DistTerm> {
        let mut out = vec![
            DistTerm::HeavisidePlus,
            DistTerm::HeavisideMinus,
            DistTerm::LogPlus,
            DistTerm::LogMinus,
            DistTerm::LogAbs,
        ];
        for p in 0..=p_max {
            out.push(DistTerm::DeltaDeriv(p));
        }
        for k in 1..=p_max as i32 {
            out.push(DistTerm::XPlusPow(k));
            out.push(DistTerm::XMinusPow(k));
        }
        for p in 1..=(p_max as i32 + 1) {
            out.push(DistTerm::XPlusPow(-p));
            out.push(DistTerm::XMinusPow(-p));
        }
        for p in 1..=p_max.max(1) as i32 {
            out.push(DistTerm::XPow(-p));
        }
        out
    }
}

impl fmt::Display for DistTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistTerm::DeltaDeriv(p) => write!(f, "delta^({p})"),
            DistTerm::HeavisidePlus => f.write_str("H"),
            DistTerm::HeavisideMinus => f.write_str("Hcheck"),
            DistTerm::XPlusPow(k) => write!(f, "x_+^{{{k}}}"),
            DistTerm::XMinusPow(k) => write!(f, "x_-^{{{k}}}"),
            DistTerm::XPow(k) => write!(f, "x^{{{k}}}"),
            DistTerm::LogPlus => f.write_str("ln x_+"),
            DistTerm::LogMinus => f.write_str("ln x_-"),
            DistTerm::LogAbs => f.write_str("ln|x|"),
        }
    }
}

fn braced_int(s: &str) -> Option<i32> {
    s.strip_prefix('{')?.strip_suffix('}')?.parse().ok()
}

impl FromStr for DistTerm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("unknown distribution `{s}`"));
        let t = match s {
            "H" => DistTerm::HeavisidePlus,
            "Hcheck" => DistTerm::HeavisideMinus,
            "delta" => DistTerm::DeltaDeriv(0),
            "ln x_+" => DistTerm::LogPlus,
            "ln x_-" => DistTerm::LogMinus,
            "ln|x|" => DistTerm::LogAbs,
            _ => {
                if let Some(rest) = s.strip_prefix("delta^(") {
                    let p = rest
                        .strip_suffix(')')
                        .and_then(|v| v.parse().ok())
                        .ok_or_else(bad)?;
                    DistTerm::DeltaDeriv(p)
                } else if let Some(rest) = s.strip_prefix("x_+^") {
                    DistTerm::XPlusPow(braced_int(rest).ok_or_else(bad)?)
                } else if let Some(rest) = s.strip_prefix("x_-^") {
                    DistTerm::XMinusPow(braced_int(rest).ok_or_else(bad)?)
                } else if let Some(rest) = s.strip_prefix("x^") {
                    DistTerm::XPow(braced_int(rest).ok_or_else(bad)?)
                } else {
                    return Err(bad());
                }
            }
        };
        t.validate()
    }
}

impl TryFrom<String> for DistTerm {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<DistTerm> for String {
    fn from(t: DistTerm) -> String {
        t.to_string()
    }
}

fn sign(p: u32) -> f64 {
    if p.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Exact distributional derivative.
pub fn derive(t: DistTerm) -> LinearCombo {
    use DistTerm::*;
    let real = |c: f64, t: DistTerm| (c, t);
    let terms: Vec<(f64, DistTerm)> = match t {
        DeltaDeriv(p) => vec![real(1.0, DeltaDeriv(p + 1))],
        HeavisidePlus | XPlusPow(0) => vec![real(1.0, DeltaDeriv(0))],
        HeavisideMinus | XMinusPow(0) => vec![real(-1.0, DeltaDeriv(0))],
        XPlusPow(1) => vec![real(1.0, HeavisidePlus)],
        XMinusPow(1) => vec![real(-1.0, HeavisideMinus)],
        XPlusPow(k) if k > 1 => vec![real(k as f64, XPlusPow(k - 1))],
        XMinusPow(k) if k > 1 => vec![real(-(k as f64), XMinusPow(k - 1))],
        XPlusPow(k) => {
            let p = (-k) as u32;
            vec![
                real(-(p as f64), XPlusPow(k - 1)),
                real(sign(p) / factorial(p as usize), DeltaDeriv(p)),
            ]
        }
        XMinusPow(k) => {
            let p = (-k) as u32;
            vec![
                real(p as f64, XMinusPow(k - 1)),
                real(-1.0 / factorial(p as usize), DeltaDeriv(p)),
            ]
        }
        XPow(k) => vec![real(k as f64, XPow(k - 1))],
        LogPlus => vec![real(1.0, XPlusPow(-1))],
        LogMinus => vec![real(-1.0, XMinusPow(-1))],
        LogAbs => vec![real(1.0, XPow(-1))],
    };
    LinearCombo::from_real(terms)
}

/// Mirror image under `x ↦ -x`: returns the sign and the reflected tag.
pub fn reflect(t: DistTerm) -> (f64, DistTerm) {
    use DistTerm::*;
    match t {
        DeltaDeriv(p) => (sign(p), DeltaDeriv(p)),
        HeavisidePlus => (1.0, HeavisideMinus),
        HeavisideMinus => (1.0, HeavisidePlus),
        XPlusPow(k) => (1.0, XMinusPow(k)),
        XMinusPow(k) => (1.0, XPlusPow(k)),
        XPow(k) => (sign(k.unsigned_abs()), XPow(k)),
        LogPlus => (1.0, LogMinus),
        LogMinus => (1.0, LogPlus),
        LogAbs => (1.0, LogAbs),
    }
}

/// `x^{-p} = x_+^{-p} + (-1)^p x_-^{-p}`.
pub fn decompose_xpow(p: u32) -> Result<LinearCombo> {
    if p == 0 {
        return Err(Error::Domain("decompose_xpow needs p ≥ 1".into()));
    }
    let k = -(p as i32);
    Ok(LinearCombo::from_real(vec![
        (1.0, DistTerm::XPlusPow(k)),
        (sign(p), DistTerm::XMinusPow(k)),
    ]))
}
