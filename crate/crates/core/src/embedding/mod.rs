//! Mollifier embedding of catalogue distributions.
//!
//! Every catalogue term is written as a combination of two kinds of atoms: a derivative
//! of δ, or an `n`-th distributional derivative of a locally integrable base function
//! (a one-sided power or a logarithm). In the variable `w = x/ε` each atom is
//! homogeneous, so its representative is `ε^A (c₀(w) + c₁(w) ln ε)` with a shape
//! `(c₀, c₁)` that does not depend on ε. Shapes inside the kernel support `|w| < l`
//! need a log-singular quadrature and are memoized; outside it the classical
//! derivative of the base function is smooth and is averaged against φ directly, by
//! a moment series once `|w|` is large.

mod shape;
mod table;

use std::sync::{Arc, OnceLock};

use dashmap::DashMap;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dist_core::{sigma, DistTerm, LinearCombo};
use crate::error::{Error, Result};
use crate::quad::QuadConfig;
use crate::smooth_kit::poly::factorial;
use crate::smooth_kit::MollifierSpec;

use table::ShapeTable;

/// Which part of the line a base function lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    Plus,
    Minus,
    Abs,
}

/// A locally integrable function whose derivatives generate the singular terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Base {
    /// `ln x_+`, `ln x_-` or `ln|x|`.
    Log(Side),
    /// `x_+^k` or `x_-^k` with `k ≥ 0`.
    Pow(Side, u32),
}

impl Base {
    pub fn from_term(t: DistTerm) -> Result<Base> {
        Ok(match t.canonical() {
            DistTerm::HeavisidePlus => Base::Pow(Side::Plus, 0),
            DistTerm::HeavisideMinus => Base::Pow(Side::Minus, 0),
            DistTerm::XPlusPow(k) if k > 0 => Base::Pow(Side::Plus, k as u32),
            DistTerm::XMinusPow(k) if k > 0 => Base::Pow(Side::Minus, k as u32),
            DistTerm::LogPlus => Base::Log(Side::Plus),
            DistTerm::LogMinus => Base::Log(Side::Minus),
            DistTerm::LogAbs => Base::Log(Side::Abs),
            other => return Err(Error::Domain(format!("{other} is not locally integrable"))),
        })
    }

    pub fn term(self) -> DistTerm {
        match self {
            Base::Log(Side::Plus) => DistTerm::LogPlus,
            Base::Log(Side::Minus) => DistTerm::LogMinus,
            Base::Log(Side::Abs) => DistTerm::LogAbs,
            Base::Pow(Side::Minus, 0) => DistTerm::HeavisideMinus,
            Base::Pow(Side::Minus, k) => DistTerm::XMinusPow(k as i32),
            Base::Pow(_, 0) => DistTerm::HeavisidePlus,
            Base::Pow(_, k) => DistTerm::XPlusPow(k as i32),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Atom {
    Delta(u32),
    /// `∂ⁿ base`.
    Shift {
        base: Base,
        n: u32,
    },
}

impl Atom {
    /// Exponent `A` in `ε^A · shape(x/ε)`.
    pub fn homogeneity(self) -> i32 {
        match self {
            Atom::Delta(p) => -(p as i32) - 1,
            Atom::Shift {
                base: Base::Log(_),
                n,
            } => -(n as i32),
            Atom::Shift {
                base: Base::Pow(_, k),
                n,
            } => k as i32 - n as i32,
        }
    }

    pub fn kernel_order(self) -> usize {
        match self {
            Atom::Delta(p) => p as usize,
            Atom::Shift { n, .. } => n as usize,
        }
    }
}

/// Polynomial in `ln ε`: `c[0] + c[1] ln ε + c[2] ln² ε`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LogPoly(pub [f64; 3]);

impl LogPoly {
    pub fn constant(c: f64) -> Self {
        LogPoly([c, 0.0, 0.0])
    }

    pub fn linear(c0: f64, c1: f64) -> Self {
        LogPoly([c0, c1, 0.0])
    }

    pub fn scale(self, a: f64) -> Self {
        LogPoly(self.0.map(|c| a * c))
    }

    pub fn at(self, ln_eps: f64) -> f64 {
        self.0[0] + ln_eps * (self.0[1] + ln_eps * self.0[2])
    }
}

impl std::ops::Add for LogPoly {
    type Output = LogPoly;
    fn add(self, o: LogPoly) -> Self {
        LogPoly([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl std::ops::Mul for LogPoly {
    type Output = LogPoly;
    /// Product, truncated at `ln² ε` (never exceeded by binary products).
    fn mul(self, o: LogPoly) -> Self {
        let a = self.0;
        let b = o.0;
        LogPoly([
            a[0] * b[0],
            a[0] * b[1] + a[1] * b[0],
            a[0] * b[2] + a[1] * b[1] + a[2] * b[0],
        ])
    }
}

/// One catalogue term as a real combination of atoms of equal homogeneity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermRep {
    pub term: DistTerm,
    pub homogeneity: i32,
    pub parts: Vec<(f64, Atom)>,
}

impl TermRep {
    pub fn new(t: DistTerm) -> Result<TermRep> {
        let t = t.validate()?.canonical();
        let shift = |base, n| Atom::Shift { base, n };
        let sgn = |p: u32| if p.is_multiple_of(2) { 1.0 } else { -1.0 };
        let parts = match t {
            DistTerm::DeltaDeriv(p) => vec![(1.0, Atom::Delta(p))],
            DistTerm::XPlusPow(k) if k < 0 => {
                let p = (-k - 1) as u32;
                let f = factorial(p as usize);
                vec![
                    (sgn(p) / f, shift(Base::Log(Side::Plus), p + 1)),
                    (sgn(p) * sigma(p) / f, Atom::Delta(p)),
                ]
            }
            DistTerm::XMinusPow(k) if k < 0 => {
                let p = (-k - 1) as u32;
                let f = factorial(p as usize);
                vec![
                    (-1.0 / f, shift(Base::Log(Side::Minus), p + 1)),
                    (sigma(p) / f, Atom::Delta(p)),
                ]
            }
            DistTerm::XPow(k) => {
                let p = (-k) as u32;
                vec![(
                    sgn(p - 1) / factorial(p as usize - 1),
                    shift(Base::Log(Side::Abs), p),
                )]
            }
            other => vec![(1.0, shift(Base::from_term(other)?, 0))],
        };
        // `σ₀ = 0` leaves a zero δ part; drop it.
        let parts: Vec<(f64, Atom)> = parts.into_iter().filter(|(c, _)| *c != 0.0).collect();
        let homogeneity = parts[0].1.homogeneity();
        Ok(TermRep {
            term: t,
            homogeneity,
            parts,
        })
    }

    pub fn kernel_order(&self) -> usize {
        self.parts
            .iter()
            .map(|(_, a)| a.kernel_order())
            .max()
            .unwrap_or(0)
    }

    /// Shape at `w = x/ε` as a polynomial in `ln ε`.
    pub fn shape(&self, emb: &Embedder, w: f64) -> Result<LogPoly> {
        let mut acc = LogPoly::default();
        for &(c, atom) in &self.parts {
            let [c0, c1] = emb.atom_shape(atom, w)?;
            acc = acc + LogPoly::linear(c0, c1).scale(c);
        }
        Ok(acc)
    }
}

struct EmbedderInner {
    spec: MollifierSpec,
    cfg: QuadConfig,
    tables: DashMap<Atom, Arc<OnceLock<std::result::Result<ShapeTable, String>>>>,
}

/// A mollifier with the shape tables shared by all representatives built from it.
/// Cloning is cheap; clones share the tables.
#[derive(Clone)]
pub struct Embedder {
    inner: Arc<EmbedderInner>,
}

impl std::fmt::Debug for Embedder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Embedder")
            .field("mollifier", &self.inner.spec.id())
            .finish()
    }
}

impl Embedder {
    pub fn new(spec: MollifierSpec) -> Self {
        Self::with_config(
            spec,
            QuadConfig {
                rel_tol: 1e-13,
                abs_tol: 1e-15,
                max_subdivisions: 500,
                scale_hint: None,
            },
        )
    }

    pub fn with_config(spec: MollifierSpec, cfg: QuadConfig) -> Self {
        Self {
            inner: Arc::new(EmbedderInner {
                spec,
                cfg,
                tables: DashMap::new(),
            }),
        }
    }

    pub fn mollifier(&self) -> &MollifierSpec {
        &self.inner.spec
    }

    /// Support radius `l` of the mollifier.
    pub fn radius(&self) -> f64 {
        self.inner.spec.support()
    }

    /// Number of atoms tabulated so far.
    pub fn cached_shapes(&self) -> usize {
        self.inner.tables.len()
    }

    fn check(&self, rep: &TermRep) -> Result<()> {
        let max = self.inner.spec.max_derivative();
        if rep.kernel_order() > max {
            return Err(Error::UnsupportedOrder {
                order: rep.kernel_order(),
                max,
            });
        }
        Ok(())
    }

    /// Shape `(c₀, c₁)` of one atom at `w`, by direct quadrature or moment series.
    pub fn direct_shape(&self, atom: Atom, w: f64) -> Result<[f64; 2]> {
        match atom {
            Atom::Delta(p) => {
                let s = if p % 2 == 0 { 1.0 } else { -1.0 };
                Ok([s * self.inner.spec.phi_deriv(p as usize, -w), 0.0])
            }
            Atom::Shift { base, n } => {
                let (spec, cfg) = (&self.inner.spec, &self.inner.cfg);
                if w.abs() < self.radius() {
                    shape::near(spec, base, n as usize, w, cfg)
                } else {
                    shape::far(spec, base, n as usize, w, cfg)
                }
            }
        }
    }

    fn table(&self, atom: Atom) -> Result<Arc<OnceLock<std::result::Result<ShapeTable, String>>>> {
        let cell = self.inner.tables.entry(atom).or_default().clone();
        cell.get_or_init(|| {
            let l = self.radius();
            let marks = [
                -4.0 * l,
                -2.0 * l,
                -l,
                -0.5 * l,
                0.0,
                0.5 * l,
                l,
                2.0 * l,
                4.0 * l,
            ];
            ShapeTable::build(
                |w| self.direct_shape(atom, w),
                shape::SERIES_RATIO * l,
                l,
                &marks,
            )
            .map_err(|e| e.to_string())
        });
        Ok(cell)
    }

    /// Shape `(c₀, c₁)` of one atom at `w`. Shifted atoms are tabulated on first use
    /// for `|w| < 8l`; farther out the moment series is used directly.
    pub fn atom_shape(&self, atom: Atom, w: f64) -> Result<[f64; 2]> {
        match atom {
            Atom::Delta(_) => self.direct_shape(atom, w),
            Atom::Shift { .. } => {
                if w.abs() >= shape::SERIES_RATIO * self.radius() {
                    return self.direct_shape(atom, w);
                }
                let cell = self.table(atom)?;
                match cell.get().expect("initialized") {
                    Ok(t) => Ok(t.eval(w)),
                    Err(e) => Err(Error::Domain(format!("shape table for {atom:?}: {e}"))),
                }
            }
        }
    }

    /// Worst validated interpolation error of the tables built so far, relative to
    /// each table's largest value.
    pub fn table_error(&self) -> f64 {
        self.inner
            .tables
            .iter()
            .filter_map(|e| {
                e.value()
                    .get()
                    .and_then(|r| r.as_ref().ok())
                    .map(|t| t.max_error)
            })
            .fold(0.0, f64::max)
    }
}

/// Evaluable `x^m · Σ c_k ũ_k(ε, x)` for one mollifier.
#[derive(Debug, Clone)]
pub struct Representative {
    source: LinearCombo,
    embedder: Embedder,
    monomial: u32,
    terms: Vec<(Complex64, TermRep)>,
}

impl Representative {
    pub fn source(&self) -> &LinearCombo {
        &self.source
    }

    pub fn embedder(&self) -> &Embedder {
        &self.embedder
    }

    pub fn mollifier(&self) -> &MollifierSpec {
        self.embedder.mollifier()
    }

    pub fn monomial(&self) -> u32 {
        self.monomial
    }

    pub fn terms(&self) -> &[(Complex64, TermRep)] {
        &self.terms
    }

    /// Highest derivative of φ that evaluation touches.
    pub fn max_kernel_order(&self) -> usize {
        self.terms
            .iter()
            .map(|(_, t)| t.kernel_order())
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, eps: f64, x: f64) -> Result<Complex64> {
        check_eps(eps)?;
        let w = x / eps;
        let ln_eps = eps.ln();
        let mut acc = Complex64::new(0.0, 0.0);
        for (c, t) in &self.terms {
            let s = t.shape(&self.embedder, w)?.at(ln_eps);
            acc += c * s * eps.powi(t.homogeneity);
        }
        Ok(acc * x.powi(self.monomial as i32))
    }

    /// Pointwise product with `x^m`.
    pub fn multiply_by_monomial(&self, m: u32) -> Representative {
        Representative {
            monomial: self.monomial + m,
            ..self.clone()
        }
    }

    /// The same function viewed as a sum of one-factor products.
    pub fn to_product(&self) -> EmbeddedProduct {
        EmbeddedProduct {
            embedder: self.embedder.clone(),
            summands: self
                .terms
                .iter()
                .map(|(c, t)| EmbeddedSummand {
                    coeff: *c,
                    factors: vec![t.clone()],
                    monomial: self.monomial,
                })
                .collect(),
        }
    }
}

pub(crate) fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("scale must be positive, got {eps}")))
    }
}

/// Representative of a combination of catalogue terms.
pub fn embed(u: &LinearCombo, emb: &Embedder) -> Result<Representative> {
    let mut terms = Vec::with_capacity(u.terms().len());
    for &(c, t) in u.terms() {
        let rep = TermRep::new(t)?;
        emb.check(&rep)?;
        terms.push((c, rep));
    }
    Ok(Representative {
        source: u.clone(),
        embedder: emb.clone(),
        monomial: 0,
        terms,
    })
}

/// Representative of `∂ⁿ g` for a locally integrable catalogue term `g`, with the
/// derivatives moved onto the kernel.
pub fn derivative_shift(g: DistTerm, n: u32, emb: &Embedder) -> Result<Representative> {
    let base = Base::from_term(g)?;
    let atom = Atom::Shift { base, n };
    let mut source = LinearCombo::single(g);
    for _ in 0..n {
        source = source.derive();
    }
    let rep = TermRep {
        term: g,
        homogeneity: atom.homogeneity(),
        parts: vec![(1.0, atom)],
    };
    emb.check(&rep)?;
    Ok(Representative {
        source: source.canonical(),
        embedder: emb.clone(),
        monomial: 0,
        terms: vec![(Complex64::new(1.0, 0.0), rep)],
    })
}

/// `coeff · x^m · Π factors`.
#[derive(Debug, Clone)]
pub struct EmbeddedSummand {
    pub coeff: Complex64,
    pub factors: Vec<TermRep>,
    pub monomial: u32,
}

impl EmbeddedSummand {
    pub fn homogeneity(&self) -> i32 {
        self.factors.iter().map(|f| f.homogeneity).sum::<i32>() + self.monomial as i32
    }

    /// `w^m Π shape_k(w)`, without the coefficient.
    pub fn shape(&self, emb: &Embedder, w: f64) -> Result<LogPoly> {
        let mut acc = LogPoly::constant(w.powi(self.monomial as i32));
        for f in &self.factors {
            if acc == LogPoly::default() {
                break;
            }
            acc = acc * f.shape(emb, w)?;
        }
        Ok(acc)
    }
}

/// A sum of products of embedded terms bound to one mollifier.
#[derive(Debug, Clone)]
pub struct EmbeddedProduct {
    embedder: Embedder,
    summands: Vec<EmbeddedSummand>,
}

impl EmbeddedProduct {
    pub fn new(embedder: Embedder, summands: Vec<EmbeddedSummand>) -> Result<Self> {
        for s in &summands {
            for f in &s.factors {
                embedder.check(f)?;
            }
        }
        Ok(Self { embedder, summands })
    }

    pub fn embedder(&self) -> &Embedder {
        &self.embedder
    }

    pub fn summands(&self) -> &[EmbeddedSummand] {
        &self.summands
    }

    pub fn eval(&self, eps: f64, x: f64) -> Result<Complex64> {
        check_eps(eps)?;
        let w = x / eps;
        let ln_eps = eps.ln();
        let mut acc = Complex64::new(0.0, 0.0);
        for s in &self.summands {
            let v = s.shape(&self.embedder, w)?.at(ln_eps);
            acc += s.coeff * v * eps.powi(s.homogeneity());
        }
        Ok(acc)
    }
}
