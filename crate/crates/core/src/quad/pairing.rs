//! `∫ F(ε, x) ψ(x) dx` for a sum of embedded products.
//!
//! A summand of homogeneity `A = -N` behaves like `ε^{-N} H(x/ε)`. With `N ≥ 2` its
//! pairing grows like `ε^{1-N}` and the balanced combinations cancel that growth only
//! between summands, which would leave nothing but rounding noise at small ε. So each
//! summand is paired against `ψ - T`, where `T` is the Taylor polynomial of ψ of degree
//! `N - 2`, and the Taylor part is accounted for exactly:
//!
//! `∫ x^j ε^{-N} H(x/ε) dx = ε^{j+1-N} ∫ w^j H(w) dw`,
//!
//! with moments `∫ w^j H` that depend neither on ψ nor on ε. Those are returned as
//! [`DivergentTerm`]s; the remaining integral is finite and returned as `regular`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::embedding::{check_eps, EmbeddedProduct, EmbeddedSummand, LogPoly};
use crate::error::Result;
use crate::smooth_kit::{Smooth, TestFunction};

use super::{try_integrate_pieces, try_integrate_tail, QuadConfig, QuadResult};

/// Taylor coefficients kept for the remainder series near the origin.
const TAYLOR_LEN: usize = 64;

/// `coeff · ε^power · (ln ε)^log_power`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergentTerm {
    pub power: i32,
    pub log_power: u32,
    pub coeff: Complex64,
}

impl DivergentTerm {
    pub fn value(&self, eps: f64) -> Complex64 {
        self.coeff * eps.powi(self.power) * eps.ln().powi(self.log_power as i32)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairingValue {
    pub eps: f64,
    /// Finite part of the pairing after the Taylor terms are taken out.
    pub regular: Complex64,
    /// Contributions of the Taylor terms, merged by power; empty when no summand is
    /// more singular than `ε^{-1}`.
    pub divergent: Vec<DivergentTerm>,
    /// Quadrature error of `regular`.
    pub error_estimate: f64,
    /// Moment quadrature error propagated into `divergent`.
    pub divergent_error: f64,
    pub subdivisions_used: usize,
    pub converged: bool,
}

impl PairingValue {
    pub fn total(&self) -> Complex64 {
        self.regular
            + self
                .divergent
                .iter()
                .map(|d| d.value(self.eps))
                .sum::<Complex64>()
    }
}

/// `∫ w^j H_k(w) dw` for one summand: entry `[j][b]` multiplies `(ln ε)^b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummandMoments {
    pub summand: usize,
    pub order: u32,
    pub moments: Vec<[f64; 3]>,
    pub error_estimate: f64,
    pub converged: bool,
}

/// Combined moment `Σ_k c_k ∫ w^j H_k` over the summands of one singular order;
/// a balanced product needs every one of these to vanish.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CancellationCheck {
    pub order: u32,
    pub j: u32,
    pub log_power: u32,
    pub combined: Complex64,
    /// `Σ_k |c_k ∫ w^j H_k|`, the size the cancellation is measured against.
    pub scale: f64,
    pub error_estimate: f64,
}

impl CancellationCheck {
    pub fn cancels(&self, rel_tol: f64) -> bool {
        self.combined.norm() <= rel_tol * self.scale.max(1.0) + self.error_estimate
    }
}

fn singular_order(s: &EmbeddedSummand) -> u32 {
    (-s.homogeneity()).max(0) as u32
}

/// Integral of `f` over the whole line, with breakpoints at the kernel-scale features.
///
/// Moments of balanced products vanish, so the absolute tolerance is tied to a coarse
/// estimate of `∫|f|` rather than to the value.
fn whole_line<F>(f: F, l: f64, cfg: &QuadConfig) -> Result<QuadResult>
where
    F: Fn(f64) -> Result<Complex64>,
{
    let far = 8.0 * l;
    let points = [-far, -l, 0.0, l, far];
    let run = |g: &dyn Fn(f64) -> Result<Complex64>, c: &QuadConfig| -> Result<QuadResult> {
        let body = try_integrate_pieces(g, &points, c)?;
        let up = try_integrate_tail(g, far, true, c)?;
        let down = try_integrate_tail(g, -far, false, c)?;
        Ok(body.combine(up).combine(down))
    };
    let coarse = QuadConfig {
        rel_tol: 1e-3,
        abs_tol: f64::MIN_POSITIVE,
        max_subdivisions: 50,
        scale_hint: None,
    };
    let l1 = run(&|w| Ok(Complex64::new(f(w)?.norm(), 0.0)), &coarse)?.re();
    let fine = QuadConfig {
        abs_tol: cfg.abs_tol.max(cfg.rel_tol * l1),
        ..*cfg
    };
    run(&f, &fine)
}

/// Moments `∫ w^j H_k(w) dw`, `j ≤ N_k - 2`, for every summand with `N_k ≥ 2`.
pub fn divergence_moments(p: &EmbeddedProduct, cfg: &QuadConfig) -> Result<Vec<SummandMoments>> {
    let emb = p.embedder();
    let l = emb.radius();
    let mut out = Vec::new();
    for (k, s) in p.summands().iter().enumerate() {
        let n = singular_order(s);
        if n < 2 {
            continue;
        }
        let mut moments = Vec::new();
        let mut error = 0.0;
        let mut converged = true;
        for j in 0..=(n - 2) as i32 {
            let mut row = [0.0; 3];
            // Two log powers per complex integral.
            for (slot, pair) in [(0usize, true), (2usize, false)] {
                let r = whole_line(
                    |w| {
                        let h = s.shape(emb, w)?.0;
                        let wj = w.powi(j);
                        Ok(if pair {
                            Complex64::new(wj * h[0], wj * h[1])
                        } else {
                            Complex64::new(wj * h[2], 0.0)
                        })
                    },
                    l,
                    cfg,
                )?;
                row[slot] = r.value.re;
                if pair {
                    row[1] = r.value.im;
                }
                error += r.error_estimate;
                converged &= r.converged;
            }
            moments.push(row);
        }
        out.push(SummandMoments {
            summand: k,
            order: n,
            moments,
            error_estimate: error,
            converged,
        });
    }
    Ok(out)
}

/// Per `(order, j, log power)` cancellation of the divergent moments.
pub fn divergence_certificate(
    p: &EmbeddedProduct,
    cfg: &QuadConfig,
) -> Result<Vec<CancellationCheck>> {
    Ok(combine_moments(p, &divergence_moments(p, cfg)?))
}

fn combine_moments(p: &EmbeddedProduct, moments: &[SummandMoments]) -> Vec<CancellationCheck> {
    let mut acc: BTreeMap<(u32, u32, u32), CancellationCheck> = BTreeMap::new();
    for m in moments {
        let c = p.summands()[m.summand].coeff;
        for (j, row) in m.moments.iter().enumerate() {
            for (b, &mu) in row.iter().enumerate() {
                let e = acc
                    .entry((m.order, j as u32, b as u32))
                    .or_insert(CancellationCheck {
                        order: m.order,
                        j: j as u32,
                        log_power: b as u32,
                        combined: Complex64::new(0.0, 0.0),
                        scale: 0.0,
                        error_estimate: 0.0,
                    });
                e.combined += c * mu;
                e.scale += (c * mu).norm();
                e.error_estimate += c.norm() * m.error_estimate;
            }
        }
    }
    acc.into_values().collect()
}

/// The moments of a product, computed once and reused across ε and ψ.
pub struct PairingPlan<'a> {
    product: &'a EmbeddedProduct,
    moments: Vec<SummandMoments>,
}

impl<'a> PairingPlan<'a> {
    pub fn new(product: &'a EmbeddedProduct, cfg: &QuadConfig) -> Result<Self> {
        Ok(Self {
            product,
            moments: divergence_moments(product, cfg)?,
        })
    }

    pub fn moments(&self) -> &[SummandMoments] {
        &self.moments
    }

    pub fn product(&self) -> &EmbeddedProduct {
        self.product
    }

    pub fn certificate(&self) -> Vec<CancellationCheck> {
        combine_moments(self.product, &self.moments)
    }

    pub fn pair(&self, psi: &TestFunction, eps: f64, cfg: &QuadConfig) -> Result<PairingValue> {
        check_eps(eps)?;
        let cfg = cfg.with_scale(eps);
        let p = self.product;
        let emb = p.embedder();
        let l = emb.radius();
        let ln_eps = eps.ln();
        let taylor = psi.taylor_at_zero(TAYLOR_LEN);
        let x_series = 0.25 * psi.interior_margin();
        let orders: Vec<u32> = p.summands().iter().map(singular_order).collect();
        let max_order = orders.iter().copied().max().unwrap_or(0);

        // ψ - T_N at x: direct subtraction away from 0, the tail of the series near it.
        let remainder = |n: u32, x: f64, psi_x: f64| -> f64 {
            if n < 2 {
                return psi_x;
            }
            let start = (n - 1) as usize;
            if x.abs() < x_series {
                taylor[start..].iter().rev().fold(0.0, |acc, c| acc * x + c) * x.powi(start as i32)
            } else {
                psi_x - taylor[..start].iter().rev().fold(0.0, |acc, c| acc * x + c)
            }
        };
        let summand_value = |s: &EmbeddedSummand, x: f64| -> Result<Complex64> {
            let h: LogPoly = s.shape(emb, x / eps)?;
            Ok(s.coeff * h.at(ln_eps) * eps.powi(s.homogeneity()))
        };
        let integrand = |x: f64| -> Result<Complex64> {
            let psi_x = psi.deriv_unchecked(0, x);
            let mut acc = Complex64::new(0.0, 0.0);
            for (s, &n) in p.summands().iter().zip(&orders) {
                let r = remainder(n, x, psi_x);
                if r != 0.0 {
                    acc += summand_value(s, x)? * r;
                }
            }
            Ok(acc)
        };

        let (a, b) = psi.support();
        let edge = eps * l;
        let reach = a.abs().max(b.abs()).max(edge);
        let marks = [8.0 * edge, x_series, a.abs(), b.abs()];
        let mut right = vec![edge];
        let mut left = vec![-edge];
        for m in marks {
            if m > edge && m < reach {
                right.push(m);
                left.push(-m);
            }
        }
        right.push(reach);
        left.push(-reach);
        right.sort_by(f64::total_cmp);
        right.dedup();
        left.sort_by(f64::total_cmp);
        left.dedup();

        // Outside supp ψ only the Taylor parts survive.
        let tail = |x: f64| -> Result<Complex64> {
            if x.abs() > 1e100 {
                return Ok(Complex64::new(0.0, 0.0));
            }
            let mut acc = Complex64::new(0.0, 0.0);
            for (s, &n) in p.summands().iter().zip(&orders) {
                if n >= 2 {
                    acc += summand_value(s, x)? * remainder(n, x, 0.0);
                }
            }
            Ok(acc)
        };

        let run = |g: &dyn Fn(f64) -> Result<Complex64>,
                   t: &dyn Fn(f64) -> Result<Complex64>,
                   c: &QuadConfig| {
            // Kernel-scale region in w = x/ε, so the nodes repeat across ε.
            let inner = try_integrate_pieces(|w| Ok(g(eps * w)? * eps), &[-l, 0.0, l], c)?;
            let mut total = inner
                .combine(try_integrate_pieces(g, &left, c)?)
                .combine(try_integrate_pieces(g, &right, c)?);
            if max_order >= 2 {
                total = total
                    .combine(try_integrate_tail(t, reach, true, c)?)
                    .combine(try_integrate_tail(t, -reach, false, c)?);
            }
            Ok::<_, crate::error::Error>(total)
        };
        let mut total = run(&integrand, &tail, &cfg)?;
        if !total.converged {
            // A pairing that vanishes by cancellation cannot meet a relative tolerance;
            // measure the error against a coarse estimate of ∫|integrand| instead.
            let coarse = QuadConfig {
                rel_tol: 1e-3,
                abs_tol: f64::MIN_POSITIVE,
                max_subdivisions: 50,
                ..cfg
            };
            let abs_of = |f: &dyn Fn(f64) -> Result<Complex64>, x: f64| {
                Ok(Complex64::new(f(x)?.norm(), 0.0))
            };
            let l1 = run(&|x| abs_of(&integrand, x), &|x| abs_of(&tail, x), &coarse)?.re();
            let relaxed = QuadConfig {
                abs_tol: cfg.abs_tol.max(cfg.rel_tol * l1),
                ..cfg
            };
            let retry = run(&integrand, &tail, &relaxed)?;
            total = QuadResult {
                subdivisions_used: total.subdivisions_used + retry.subdivisions_used,
                ..retry
            };
        }

        let mut divergent: BTreeMap<(i32, u32), Complex64> = BTreeMap::new();
        for m in &self.moments {
            let c = p.summands()[m.summand].coeff;
            for (j, row) in m.moments.iter().enumerate() {
                let power = j as i32 + 1 - m.order as i32;
                for (b, &mu) in row.iter().enumerate() {
                    *divergent.entry((power, b as u32)).or_default() += c * taylor[j] * mu;
                }
            }
        }
        let moment_err: f64 = self
            .moments
            .iter()
            .map(|m| {
                p.summands()[m.summand].coeff.norm()
                    * m.error_estimate
                    * eps.powi(1 - m.order as i32)
            })
            .sum::<f64>()
            * taylor
                .iter()
                .take(max_order as usize)
                .fold(0.0, |a: f64, c| a.max(c.abs()));

        Ok(PairingValue {
            eps,
            regular: total.value,
            divergent: divergent
                .into_iter()
                .map(|((power, log_power), coeff)| DivergentTerm {
                    power,
                    log_power,
                    coeff,
                })
                .collect(),
            error_estimate: total.error_estimate,
            divergent_error: moment_err,
            subdivisions_used: total.subdivisions_used,
            converged: total.converged,
        })
    }
}

/// Pairing of a product with ψ at one ε. For a sweep, build a [`PairingPlan`] once.
pub fn pair_at_eps(
    p: &EmbeddedProduct,
    psi: &TestFunction,
    eps: f64,
    cfg: &QuadConfig,
) -> Result<PairingValue> {
    PairingPlan::new(p, cfg)?.pair(psi, eps, cfg)
}

#[cfg(test)]
mod tests;
