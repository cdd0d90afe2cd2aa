use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dist_core::{sigma, DistTerm, LinearCombo};
use crate::error::{Error, Result};
use crate::smooth_kit::poly::factorial;

use super::expr::ProductExpr;

use DistTerm::*;

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize,
)]
pub struct FormulaParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<u32>,
}

impl FormulaParams {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn p(p: i32) -> Self {
        Self {
            p: Some(p),
            q: None,
        }
    }

    pub fn pq(p: i32, q: u32) -> Self {
        Self {
            p: Some(p),
            q: Some(q),
        }
    }
}

/// Which parameters a formula takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Arity {
    Fixed,
    /// `p ≥ min`.
    P {
        min: i32,
    },
    /// `p, q ≥ 1`.
    PQ,
    /// Any integer exponent `a`, passed as `p`.
    Exponent,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FormulaInfo {
    pub id: &'static str,
    pub arity: Arity,
    pub statement: &'static str,
}

const REGISTRY: &[FormulaInfo] = &[
    FormulaInfo { id: "MIK", arity: Arity::Fixed, statement: "x^-1·x^-1 − π² δ·δ ≈ x^-2" },
    FormulaInfo {
        id: "FSTEP",
        arity: Arity::PQ,
        statement: "x^-p·x^-q − π²(−1)^(p+q)/((p−1)!(q−1)!) δ^(p−1)·δ^(q−1) ≈ x^(−p−q)",
    },
    FormulaInfo { id: "CMUC", arity: Arity::P { min: 0 }, statement: "x_+^p·δ^(p) ≈ (−1)^p p!/2 δ" },
    FormulaInfo {
        id: "XPDQ",
        arity: Arity::PQ,
        statement: "(−1)^(q−1)/(q−1)! x^-p·δ^(q−1) + (−1)^(p−1)/(p−1)! x^-q·δ^(p−1) ≈ (−1)^(p+q−1)/(p+q−1)! δ^(p+q−1)",
    },
    FormulaInfo {
        id: "XPD1",
        arity: Arity::P { min: 1 },
        statement: "x^-p·δ + (−1)^(p−1)/(p−1)! x^-1·δ^(p−1) ≈ (−1)^p/p! δ^(p)",
    },
    FormulaInfo {
        id: "TH1+",
        arity: Arity::P { min: 0 },
        statement: "(−1)^p x_+^(−p−1)·x_-^p − ln x_+·δ ≈ σ_p/2 δ",
    },
    FormulaInfo {
        id: "TH1-",
        arity: Arity::P { min: 0 },
        statement: "(−1)^p x_-^(−p−1)·x_+^p − ln x_-·δ ≈ σ_p/2 δ",
    },
    FormulaInfo {
        id: "TH2+",
        arity: Arity::P { min: 0 },
        statement: "x^(−p−1)·x_+^p + ln|x|·δ ≈ x_+^-1 − σ_p δ",
    },
    FormulaInfo {
        id: "TH2-",
        arity: Arity::P { min: 0 },
        statement: "(−1)^(p+1) x^(−p−1)·x_-^p + ln|x|·δ ≈ x_-^-1 − σ_p δ",
    },
    FormulaInfo {
        id: "EQ55",
        arity: Arity::P { min: 0 },
        statement: "x_+^(−p−1)·x_+^p + ln x_+·δ ≈ x_+^-1 − σ_p/2 δ",
    },
    FormulaInfo { id: "COR1+", arity: Arity::P { min: 1 }, statement: "x^(−p−1)·x_+^p − x^-1·H ≈ −σ_p δ" },
    FormulaInfo {
        id: "COR1-",
        arity: Arity::P { min: 1 },
        statement: "(−1)^(p+1) x^(−p−1)·x_-^p + x^-1·Ȟ ≈ −σ_p δ",
    },
    FormulaInfo {
        id: "COR2+",
        arity: Arity::P { min: 1 },
        statement: "(x+i0)^(−p−1)·x_+^p + ln|x|·δ ≈ x_+^-1 − (σ_p + iπ/2) δ",
    },
    FormulaInfo {
        id: "COR2-",
        arity: Arity::P { min: 1 },
        statement: "(x−i0)^(−p−1)·x_+^p + ln|x|·δ ≈ x_+^-1 − (σ_p − iπ/2) δ",
    },
    FormulaInfo { id: "TH2_0", arity: Arity::Fixed, statement: "x^-1·H + ln|x|·δ ≈ x_+^-1" },
    FormulaInfo {
        id: "TH3+",
        arity: Arity::P { min: 0 },
        statement: "x^(−p−1)·H + (−1)^p/p! ln|x|·δ^(p) ≈ x_+^(−p−1)",
    },
    FormulaInfo {
        id: "TH3-",
        arity: Arity::P { min: 0 },
        statement: "(−1)^(p−1) x^(−p−1)·Ȟ + 1/p! ln|x|·δ^(p) ≈ x_-^(−p−1)",
    },
    FormulaInfo { id: "P1", arity: Arity::Fixed, statement: "x^-2·H − ln|x|·δ' ≈ x_+^-2" },
    FormulaInfo { id: "P2", arity: Arity::Fixed, statement: "x^-3·H + 1/2 ln|x|·δ'' ≈ x_+^-3" },
    FormulaInfo { id: "XX_PROP", arity: Arity::Exponent, statement: "x·x_+^a − x_+^(a+1) ≈ 0" },
];

pub fn registry() -> &'static [FormulaInfo] {
    REGISTRY
}

pub fn formula_info(id: &str) -> Result<&'static FormulaInfo> {
    REGISTRY
        .iter()
        .find(|f| f.id == id)
        .ok_or_else(|| Error::UnknownFormula(id.to_string()))
}

/// A registered identity: the product expression and the distribution it is associated with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormulaInstance {
    pub formula_id: String,
    pub params: FormulaParams,
    pub expr: ProductExpr,
    pub predicted: LinearCombo,
}

fn sgn(n: i32) -> f64 {
    if n.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

fn fact(n: i32) -> f64 {
    factorial(n as usize)
}

fn invalid(id: &str, reason: impl Into<String>) -> Error {
    Error::InvalidParams {
        formula: id.to_string(),
        reason: reason.into(),
    }
}

fn check_params(info: &FormulaInfo, params: FormulaParams) -> Result<()> {
    let id = info.id;
    match info.arity {
        Arity::Fixed => {
            if params.p.is_some() || params.q.is_some() {
                return Err(invalid(id, "takes no parameters"));
            }
        }
        Arity::P { min } => {
            let p = params.p.ok_or_else(|| invalid(id, "needs p"))?;
            if p < min {
                return Err(invalid(id, format!("needs p ≥ {min}, got {p}")));
            }
            if params.q.is_some() {
                return Err(invalid(id, "takes no q"));
            }
        }
        Arity::PQ => {
            let p = params.p.ok_or_else(|| invalid(id, "needs p"))?;
            let q = params.q.ok_or_else(|| invalid(id, "needs q"))?;
            if p < 1 || q < 1 {
                return Err(invalid(id, format!("needs p, q ≥ 1, got p={p}, q={q}")));
            }
        }
        Arity::Exponent => {
            params
                .p
                .ok_or_else(|| invalid(id, "needs the exponent a (as p)"))?;
            if params.q.is_some() {
                return Err(invalid(id, "takes no q"));
            }
        }
    }
    Ok(())
}

fn th2_plus(p: i32) -> (ProductExpr, LinearCombo) {
    let expr = ProductExpr::pair(1.0, XPow(-p - 1), XPlusPow(p)).add(&ProductExpr::pair(
        1.0,
        LogAbs,
        DeltaDeriv(0),
    ));
    let predicted =
        LinearCombo::from_real(vec![(1.0, XPlusPow(-1)), (-sigma(p as u32), DeltaDeriv(0))]);
    (expr, predicted)
}

fn th3_plus(p: i32) -> (ProductExpr, LinearCombo) {
    let expr = ProductExpr::pair(1.0, XPow(-p - 1), HeavisidePlus).add(&ProductExpr::pair(
        sgn(p) / fact(p),
        LogAbs,
        DeltaDeriv(p as u32),
    ));
    (expr, LinearCombo::single(XPlusPow(-p - 1)))
}

fn xpdq(p: i32, q: i32) -> (ProductExpr, LinearCombo) {
    let expr = ProductExpr::pair(
        sgn(q - 1) / fact(q - 1),
        XPow(-p),
        DeltaDeriv((q - 1) as u32),
    )
    .add(&ProductExpr::pair(
        sgn(p - 1) / fact(p - 1),
        XPow(-q),
        DeltaDeriv((p - 1) as u32),
    ));
    let n = p + q - 1;
    (
        expr,
        LinearCombo::from_real(vec![(sgn(n) / fact(n), DeltaDeriv(n as u32))]),
    )
}

fn fstep(p: i32, q: i32) -> (ProductExpr, LinearCombo) {
    let c = -(PI * PI) * sgn(p + q) / (fact(p - 1) * fact(q - 1));
    let expr = ProductExpr::pair(1.0, XPow(-p), XPow(-q)).add(&ProductExpr::pair(
        c,
        DeltaDeriv((p - 1) as u32),
        DeltaDeriv((q - 1) as u32),
    ));
    (expr, LinearCombo::single(XPow(-p - q)))
}

/// The registered formula `id` at the given parameters.
pub fn build_formula(id: &str, p: Option<i32>, q: Option<u32>) -> Result<FormulaInstance> {
    let info = formula_info(id)?;
    let params = FormulaParams { p, q };
    check_params(info, params)?;
    let pv = p.unwrap_or(0);
    let s = |k: i32| sigma(k as u32);
    let (expr, predicted) =
        match id {
            "MIK" => fstep(1, 1),
            "FSTEP" => fstep(pv, q.unwrap_or(1) as i32),
            "CMUC" => (
                ProductExpr::pair(1.0, XPlusPow(pv), DeltaDeriv(pv as u32)),
                LinearCombo::from_real(vec![(sgn(pv) * fact(pv) / 2.0, DeltaDeriv(0))]),
            ),
            "XPDQ" => xpdq(pv, q.unwrap_or(1) as i32),
            "XPD1" => {
                let expr =
                    ProductExpr::pair(1.0, XPow(-pv), DeltaDeriv(0)).add(&ProductExpr::pair(
                        sgn(pv - 1) / fact(pv - 1),
                        XPow(-1),
                        DeltaDeriv((pv - 1) as u32),
                    ));
                (
                    expr,
                    LinearCombo::from_real(vec![(sgn(pv) / fact(pv), DeltaDeriv(pv as u32))]),
                )
            }
            "TH1-" => (
                ProductExpr::pair(sgn(pv), XMinusPow(-pv - 1), XPlusPow(pv))
                    .add(&ProductExpr::pair(-1.0, LogMinus, DeltaDeriv(0))),
                LinearCombo::from_real(vec![(s(pv) / 2.0, DeltaDeriv(0))]),
            ),
            "TH1+" => (
                ProductExpr::pair(sgn(pv), XPlusPow(-pv - 1), XMinusPow(pv))
                    .add(&ProductExpr::pair(-1.0, LogPlus, DeltaDeriv(0))),
                LinearCombo::from_real(vec![(s(pv) / 2.0, DeltaDeriv(0))]),
            ),
            "TH2+" => th2_plus(pv),
            "TH2_0" => th2_plus(0),
            "TH2-" => (
                ProductExpr::pair(sgn(pv + 1), XPow(-pv - 1), XMinusPow(pv))
                    .add(&ProductExpr::pair(1.0, LogAbs, DeltaDeriv(0))),
                LinearCombo::from_real(vec![(1.0, XMinusPow(-1)), (-s(pv), DeltaDeriv(0))]),
            ),
            "EQ55" => (
                ProductExpr::pair(1.0, XPlusPow(-pv - 1), XPlusPow(pv)).add(&ProductExpr::pair(
                    1.0,
                    LogPlus,
                    DeltaDeriv(0),
                )),
                LinearCombo::from_real(vec![(1.0, XPlusPow(-1)), (-s(pv) / 2.0, DeltaDeriv(0))]),
            ),
            "COR1+" => (
                ProductExpr::pair(1.0, XPow(-pv - 1), XPlusPow(pv)).add(&ProductExpr::pair(
                    -1.0,
                    XPow(-1),
                    HeavisidePlus,
                )),
                LinearCombo::from_real(vec![(-s(pv), DeltaDeriv(0))]),
            ),
            "COR1-" => (
                ProductExpr::pair(sgn(pv + 1), XPow(-pv - 1), XMinusPow(pv))
                    .add(&ProductExpr::pair(1.0, XPow(-1), HeavisideMinus)),
                LinearCombo::from_real(vec![(-s(pv), DeltaDeriv(0))]),
            ),
            "COR2+" | "COR2-" => {
                let upper = id == "COR2+";
                let expr = ProductExpr::product(
                    &LinearCombo::x_plus_minus_i0(pv as u32, upper),
                    &LinearCombo::single(XPlusPow(pv)),
                )
                .add(&ProductExpr::pair(1.0, LogAbs, DeltaDeriv(0)));
                let half = if upper { PI / 2.0 } else { -PI / 2.0 };
                let predicted = LinearCombo::from_terms(vec![
                    (Complex64::new(1.0, 0.0), XPlusPow(-1)),
                    (Complex64::new(-s(pv), -half), DeltaDeriv(0)),
                ]);
                (expr, predicted)
            }
            "TH3+" => th3_plus(pv),
            "P1" => th3_plus(1),
            "P2" => th3_plus(2),
            "TH3-" => (
                ProductExpr::pair(sgn(pv - 1), XPow(-pv - 1), HeavisideMinus).add(
                    &ProductExpr::pair(1.0 / fact(pv), LogAbs, DeltaDeriv(pv as u32)),
                ),
                LinearCombo::single(XMinusPow(-pv - 1)),
            ),
            "XX_PROP" => (
                ProductExpr::monomial_times(1.0, 1, XPlusPow(pv))
                    .add(&ProductExpr::monomial_times(-1.0, 0, XPlusPow(pv + 1))),
                LinearCombo::zero(),
            ),
            _ => unreachable!("registry entry without a builder"),
        };
    Ok(FormulaInstance {
        formula_id: id.to_string(),
        params,
        expr,
        predicted,
    })
}

/// Parameter sets of the default suite.
pub fn default_params(id: &str) -> Result<Vec<FormulaParams>> {
    let info = formula_info(id)?;
    Ok(match (id, info.arity) {
        (_, Arity::Fixed) => vec![FormulaParams::none()],
        ("COR2+" | "COR2-", _) => (1..=3).map(FormulaParams::p).collect(),
        ("XPD1", _) => (1..=5).map(FormulaParams::p).collect(),
        (_, Arity::P { min }) => (min..=4).map(FormulaParams::p).collect(),
        ("FSTEP", _) => pq_up_to(5),
        (_, Arity::PQ) => pq_up_to(6),
        (_, Arity::Exponent) => (-2..=1).map(FormulaParams::p).collect(),
    })
}

fn pq_up_to(total: i32) -> Vec<FormulaParams> {
    let mut out = Vec::new();
    for p in 1..total {
        for q in 1..=(total - p) {
            out.push(FormulaParams::pq(p, q as u32));
        }
    }
    out
}

/// Mollifier order used unless configured: `max(p, q, 1) + 1`.
pub fn default_mollifier_order(params: FormulaParams) -> usize {
    let p = params.p.unwrap_or(0).max(0) as usize;
    let q = params.q.unwrap_or(0) as usize;
    p.max(q).max(1) + 1
}

impl FormulaInstance {
    /// Both sides multiplied by `c`.
    pub fn scale(&self, c: f64) -> FormulaInstance {
        let c = Complex64::new(c, 0.0);
        FormulaInstance {
            formula_id: self.formula_id.clone(),
            params: self.params,
            expr: self.expr.scale(c),
            predicted: self.predicted.scale(c),
        }
    }

    /// Replace the balanced sub-product `other.expr` by its associated distribution:
    /// both sides minus the corresponding sides of `other`.
    pub fn substitute(&self, other: &FormulaInstance) -> FormulaInstance {
        FormulaInstance {
            formula_id: format!("{}|{}", self.formula_id, other.formula_id),
            params: self.params,
            expr: self.expr.sub(&other.expr).canonical(),
            predicted: self.predicted.sub(&other.predicted).canonical(),
        }
    }

    /// Same expression and prediction up to canonical form.
    pub fn same_identity(&self, other: &FormulaInstance, tol: f64) -> bool {
        self.expr.approx_eq(&other.expr, tol) && self.predicted.approx_eq(&other.predicted, tol)
    }
}

/// Product-rule derivative of both sides.
pub fn differentiate_expr(f: &FormulaInstance) -> FormulaInstance {
    FormulaInstance {
        formula_id: format!("d({})", f.formula_id),
        params: f.params,
        expr: f.expr.derivative().canonical(),
        predicted: f.predicted.derive().canonical(),
    }
}

/// One induction step from the `x_+` form at `p - 1` to the one at `p`: differentiate,
/// take out the balanced sub-product with `q = 1`, and normalize the leading coefficient.
pub fn induction_step(prev: &FormulaInstance, p: i32) -> Result<FormulaInstance> {
    let xpd1 = build_formula("XPD1", Some(p), None)?;
    let stepped = differentiate_expr(prev).substitute(&xpd1);
    Ok(stepped.scale(-1.0 / p as f64))
}
