use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist_core::oracle_pair;
use crate::embedding::{EmbeddedProduct, Embedder};
use crate::error::{Error, Result};
use crate::quad::{CancellationCheck, PairingPlan, QuadConfig};
use crate::smooth_kit::TestFunction;

use super::expr::ProductExpr;
use super::registry::{FormulaInstance, FormulaParams};

/// Fewest converged points an extrapolation accepts.
pub const MIN_POINTS: usize = 4;

/// Scaled-column condition number above which a fit is rejected.
pub const MAX_CONDITION: f64 = 1e10;

pub const BASIS: [&str; 4] = ["1", "eps*ln(1/eps)", "eps", "eps^2"];

/// Geometric schedule `ε_k = ε₀ rᵏ`, `k < count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub eps0: f64,
    pub ratio: f64,
    pub count: usize,
}

impl Default for Schedule {
    fn default() -> Self {
        Self {
            eps0: 0.1,
            ratio: 0.5,
            count: 8,
        }
    }
}

impl Schedule {
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if !(self.eps0 > 0.0 && self.eps0.is_finite()) {
            errs.push(format!("schedule.eps0 must be positive, got {}", self.eps0));
        }
        if !(self.ratio > 0.0 && self.ratio < 1.0) {
            errs.push(format!(
                "schedule.ratio must lie in (0, 1), got {}",
                self.ratio
            ));
        }
        if self.count < MIN_POINTS {
            errs.push(format!(
                "schedule.count must be at least {MIN_POINTS}, got {}",
                self.count
            ));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }

    pub fn eps(&self) -> Vec<f64> {
        (0..self.count)
            .map(|k| self.eps0 * self.ratio.powi(k as i32))
            .collect()
    }
}

/// Limit tolerances, plus the relative tolerance on cancelling divergent moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub rel: f64,
    pub abs: f64,
    #[serde(default = "default_cancel")]
    pub cancel: f64,
}

fn default_cancel() -> f64 {
    1e-7
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rel: 1e-3,
            abs: 1e-6,
            cancel: default_cancel(),
        }
    }
}

impl Tolerances {
    pub fn allowed_gap(&self, oracle: Complex64) -> f64 {
        self.abs + self.rel * oracle.norm().max(1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub eps: f64,
    /// Pairing with the cancelling divergent moments taken out; `None` if it failed.
    pub value: Option<Complex64>,
    pub error_estimate: Option<f64>,
    /// `|Σ divergent terms|` at this ε; rounding noise for a balanced product.
    pub divergent_residual: Option<f64>,
    pub converged: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSeries {
    pub mollifier: String,
    pub psi: String,
    pub points: Vec<SweepPoint>,
}

impl SweepSeries {
    pub fn converged(&self) -> impl Iterator<Item = &SweepPoint> {
        self.points
            .iter()
            .filter(|p| p.converged && p.value.is_some())
    }
}

fn run_series(
    plan: &PairingPlan<'_>,
    psi: &TestFunction,
    schedule: &Schedule,
    cfg: &QuadConfig,
) -> SweepSeries {
    let points = schedule
        .eps()
        .into_par_iter()
        .map(|eps| match plan.pair(psi, eps, cfg) {
            Ok(v) => {
                let div: Complex64 = v.divergent.iter().map(|d| d.value(eps)).sum();
                let note = (!v.converged).then(|| "quadrature budget exhausted".to_string());
                let finite = v.regular.re.is_finite() && v.regular.im.is_finite();
                SweepPoint {
                    eps,
                    value: finite.then_some(v.regular),
                    error_estimate: Some(v.error_estimate),
                    divergent_residual: Some(div.norm()),
                    converged: v.converged && finite,
                    note,
                }
            }
            Err(e) => SweepPoint {
                eps,
                value: None,
                error_estimate: None,
                divergent_residual: None,
                converged: false,
                note: Some(e.to_string()),
            },
        })
        .collect();
    SweepSeries {
        mollifier: plan.product().embedder().mollifier().id(),
        psi: psi.id().to_string(),
        points,
    }
}

/// Pair `expr` embedded with `emb` against ψ over the schedule.
pub fn sweep(
    expr: &ProductExpr,
    psi: &TestFunction,
    emb: &Embedder,
    schedule: &Schedule,
    cfg: &QuadConfig,
) -> Result<SweepSeries> {
    schedule.validate()?;
    let product = expr.bind(emb)?;
    let plan = PairingPlan::new(&product, cfg)?;
    let series = run_series(&plan, psi, schedule, cfg);
    let n = series.converged().count();
    if n < MIN_POINTS {
        return Err(Error::Sweep(format!(
            "{n} of {} points converged for ψ = {}, mollifier {}",
            series.points.len(),
            series.psi,
            series.mollifier
        )));
    }
    Ok(series)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    pub limit: Complex64,
    pub uncertainty: f64,
    /// Coefficients on [`BASIS`].
    pub coefficients: Vec<Complex64>,
    /// Fit residual per converged point, finest last.
    pub residuals: Vec<Complex64>,
    pub residual_norm: f64,
    /// Change of the limit when the coarsest point is left out.
    pub drop_change: f64,
    pub condition: f64,
}

struct Fit {
    coefficients: Vec<Complex64>,
    residuals: Vec<Complex64>,
    condition: f64,
}

fn basis_row(eps: f64, width: usize) -> [f64; 4] {
    let row = [1.0, eps * (1.0 / eps).ln(), eps, eps * eps];
    let mut out = [0.0; 4];
    out[..width].copy_from_slice(&row[..width]);
    out
}

fn least_squares(eps: &[f64], values: &[Complex64], width: usize) -> Result<Fit> {
    let n = eps.len();
    let mut a = DMatrix::from_fn(n, width, |i, j| basis_row(eps[i], width)[j]);
    let norms: Vec<f64> = (0..width).map(|j| a.column(j).norm()).collect();
    for (j, &s) in norms.iter().enumerate() {
        a.column_mut(j).scale_mut(1.0 / s);
    }
    let svd = a.clone().svd(true, true);
    let sv = &svd.singular_values;
    let condition = sv.max() / sv.min();
    if !condition.is_finite() || condition > MAX_CONDITION {
        return Err(Error::Extrapolation(format!(
            "ill-conditioned fit over ε ∈ [{:e}, {:e}]: condition {condition:e}",
            eps[n - 1],
            eps[0]
        )));
    }
    let re = DVector::from_iterator(n, values.iter().map(|v| v.re));
    let im = DVector::from_iterator(n, values.iter().map(|v| v.im));
    let solve = |b: &DVector<f64>| {
        svd.solve(b, 0.0)
            .map_err(|e| Error::Extrapolation(e.to_string()))
    };
    let (xr, xi) = (solve(&re)?, solve(&im)?);
    let (fr, fi) = (&a * &xr, &a * &xi);
    let residuals = (0..n)
        .map(|i| Complex64::new(re[i] - fr[i], im[i] - fi[i]))
        .collect();
    let coefficients = (0..width)
        .map(|j| Complex64::new(xr[j], xi[j]) / norms[j])
        .collect();
    Ok(Fit {
        coefficients,
        residuals,
        condition,
    })
}

fn fit_width(n: usize) -> usize {
    n.min(BASIS.len())
}

/// Least-squares fit against [`BASIS`]; the limit is the constant coefficient.
pub fn extrapolate_points(eps: &[f64], values: &[Complex64]) -> Result<Extrapolation> {
    let n = eps.len();
    if n < MIN_POINTS || values.len() != n {
        return Err(Error::Extrapolation(format!(
            "need at least {MIN_POINTS} points, got {n}"
        )));
    }
    if values
        .iter()
        .any(|v| !(v.re.is_finite() && v.im.is_finite()))
    {
        return Err(Error::Extrapolation("non-finite sweep value".into()));
    }
    let full = least_squares(eps, values, fit_width(n))?;
    // With the coarsest point gone a four-point fit keeps one basis function fewer.
    let dropped = least_squares(&eps[1..], &values[1..], fit_width(n - 1).min(n - 2))?;
    let limit = full.coefficients[0];
    let residual_norm = full
        .residuals
        .iter()
        .map(|r| r.norm_sqr())
        .sum::<f64>()
        .sqrt();
    let drop_change = (dropped.coefficients[0] - limit).norm();
    let mut coefficients = full.coefficients;
    coefficients.resize(BASIS.len(), Complex64::new(0.0, 0.0));
    Ok(Extrapolation {
        limit,
        uncertainty: residual_norm.max(drop_change),
        coefficients,
        residuals: full.residuals,
        residual_norm,
        drop_change,
        condition: full.condition,
    })
}

/// Extrapolate the converged points of a series.
pub fn extrapolate(series: &SweepSeries) -> Result<Extrapolation> {
    let (eps, values): (Vec<f64>, Vec<Complex64>) = series
        .converged()
        .filter_map(|p| Some((p.eps, p.value?)))
        .unzip();
    for w in eps.windows(2) {
        if w[1] >= w[0] {
            return Err(Error::Extrapolation("ε must be strictly decreasing".into()));
        }
    }
    extrapolate_points(&eps, &values)
}

/// Outcome for one `(formula, ψ, mollifier)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssociationVerdict {
    pub formula_id: String,
    pub params: FormulaParams,
    pub psi: String,
    pub mollifier: String,
    pub limit_estimate: Option<Complex64>,
    pub uncertainty: Option<f64>,
    pub oracle_value: Option<Complex64>,
    pub abs_gap: Option<f64>,
    pub allowed_gap: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    /// Largest `|Σ c_k μ_k| / Σ |c_k μ_k|` over the divergent moments, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub worst_cancellation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<Extrapolation>,
    pub series: SweepSeries,
}

fn failed_cancellation(checks: &[CancellationCheck], tol: f64) -> Option<String> {
    let bad: Vec<String> = checks
        .iter()
        .filter(|c| !c.cancels(tol))
        .map(|c| {
            format!(
                "order {} j {} ln^{}: {:.3e} of {:.3e}",
                c.order,
                c.j,
                c.log_power,
                c.combined.norm(),
                c.scale
            )
        })
        .collect();
    (!bad.is_empty()).then(|| format!("divergent moments do not cancel ({})", bad.join("; ")))
}

fn worst_cancellation(checks: &[CancellationCheck]) -> Option<f64> {
    checks
        .iter()
        .map(|c| c.combined.norm() / c.scale.max(f64::MIN_POSITIVE))
        .reduce(f64::max)
}

struct Bound<'a> {
    plan: std::result::Result<PairingPlan<'a>, String>,
    mollifier: String,
}

#[allow(clippy::too_many_arguments)]
fn verdict(
    f: &FormulaInstance,
    bound: &Bound<'_>,
    psi: &TestFunction,
    oracle: &std::result::Result<Complex64, String>,
    tol: &Tolerances,
    schedule: &Schedule,
    cfg: &QuadConfig,
) -> AssociationVerdict {
    let mut v = AssociationVerdict {
        formula_id: f.formula_id.clone(),
        params: f.params,
        psi: psi.id().to_string(),
        mollifier: bound.mollifier.clone(),
        limit_estimate: None,
        uncertainty: None,
        oracle_value: None,
        abs_gap: None,
        allowed_gap: tol.abs,
        pass: false,
        reason: None,
        worst_cancellation: None,
        fit: None,
        series: SweepSeries {
            mollifier: bound.mollifier.clone(),
            psi: psi.id().to_string(),
            points: Vec::new(),
        },
    };
    let plan = match &bound.plan {
        Ok(p) => p,
        Err(e) => {
            v.reason = Some(e.clone());
            return v;
        }
    };
    let checks = plan.certificate();
    v.worst_cancellation = worst_cancellation(&checks);
    v.series = run_series(plan, psi, schedule, cfg);
    let oracle = match oracle {
        Ok(o) => *o,
        Err(e) => {
            v.reason = Some(format!("oracle: {e}"));
            return v;
        }
    };
    v.oracle_value = Some(oracle);
    v.allowed_gap = tol.allowed_gap(oracle);
    let n = v.series.converged().count();
    if n < MIN_POINTS {
        v.reason = Some(format!(
            "sweep failed: {n} of {} points converged",
            v.series.points.len()
        ));
        return v;
    }
    match extrapolate(&v.series) {
        Ok(fit) => {
            v.limit_estimate = Some(fit.limit);
            v.uncertainty = Some(fit.uncertainty);
            v.abs_gap = Some((fit.limit - oracle).norm());
            v.fit = Some(fit);
        }
        Err(e) => {
            v.reason = Some(e.to_string());
            return v;
        }
    }
    let gap = v.abs_gap.unwrap_or(f64::INFINITY);
    let within = gap <= v.allowed_gap;
    let cancel = failed_cancellation(&checks, tol.cancel);
    v.pass = within && cancel.is_none();
    v.reason = match (within, cancel) {
        (_, Some(c)) => Some(c),
        (false, None) => Some(format!("gap {gap:.3e} exceeds {:.3e}", v.allowed_gap)),
        _ => None,
    };
    v
}

/// Sweep, extrapolate and compare with the predicted distribution for every
/// `(ψ, mollifier)`; verdicts come out ψ-major in input order.
pub fn check_association(
    f: &FormulaInstance,
    psis: &[TestFunction],
    embedders: &[Embedder],
    tol: &Tolerances,
    schedule: &Schedule,
    cfg: &QuadConfig,
) -> Result<Vec<AssociationVerdict>> {
    if psis.is_empty() || embedders.is_empty() {
        return Err(Error::Domain(
            "check_association needs at least one ψ and one mollifier".into(),
        ));
    }
    schedule.validate()?;
    let products: Vec<std::result::Result<EmbeddedProduct, String>> = embedders
        .iter()
        .map(|e| f.expr.bind(e).map_err(|e| e.to_string()))
        .collect();
    let bound: Vec<Bound<'_>> = products
        .par_iter()
        .zip(embedders.par_iter())
        .map(|(p, e)| Bound {
            plan: match p {
                Ok(p) => PairingPlan::new(p, cfg).map_err(|e| e.to_string()),
                Err(e) => Err(e.clone()),
            },
            mollifier: e.mollifier().id(),
        })
        .collect();
    let oracles: Vec<std::result::Result<Complex64, String>> = psis
        .par_iter()
        .map(|psi| oracle_pair(&f.predicted, psi).map_err(|e| e.to_string()))
        .collect();
    let jobs: Vec<(usize, usize)> = (0..psis.len())
        .flat_map(|i| (0..bound.len()).map(move |k| (i, k)))
        .collect();
    Ok(jobs
        .into_par_iter()
        .map(|(i, k)| verdict(f, &bound[k], &psis[i], &oracles[i], tol, schedule, cfg))
        .collect())
}
