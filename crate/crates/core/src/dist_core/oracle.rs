//! Exact pairings `⟨u, ψ⟩` from the defining formulas.
//!
//! Finite-part distributions are paired through their logarithmic primitives, e.g.
//! `⟨x_+^{-p-1}, ψ⟩ = -(1/p!) ∫_0^∞ ln x ψ^{(p+1)} dx + σ_p ψ^{(p)}(0)/p!`, so every
//! integral is absolutely convergent with at most a logarithmic endpoint.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::{try_integrate, try_integrate_log, LogEnd, QuadConfig, QuadResult};
use crate::smooth_kit::poly::factorial;
use crate::smooth_kit::Smooth;

use super::combo::LinearCombo;
use super::harmonic::sigma;
use super::term::DistTerm;

fn oracle_cfg() -> QuadConfig {
    QuadConfig {
        rel_tol: 1e-13,
        abs_tol: 1e-15,
        max_subdivisions: 4000,
        scale_hint: None,
    }
}

fn real(r: QuadResult) -> f64 {
    r.value.re
}

fn d<S: Smooth>(psi: &S, n: usize, x: f64) -> Result<Complex64> {
    Ok(Complex64::new(psi.deriv(n, x)?, 0.0))
}

/// `∫_0^∞ w(x) ψ^{(n)}(x) dx` with weight `x^k` or `ln x`.
enum Weight {
    Pow(i32),
    Log,
}

fn half_line<S: Smooth>(
    psi: &S,
    n: usize,
    weight: Weight,
    plus: bool,
    cfg: &QuadConfig,
) -> Result<f64> {
    let (a, b) = psi.support();
    // Map the negative half-line onto the positive one: x ↦ -x.
    let (lo, hi) = if plus {
        (a.max(0.0), b.max(0.0))
    } else {
        ((-b).max(0.0), (-a).max(0.0))
    };
    if hi <= lo {
        return Ok(0.0);
    }
    let s = if plus { 1.0 } else { -1.0 };
    let g = |x: f64| d(psi, n, s * x);
    match weight {
        Weight::Pow(k) => Ok(real(try_integrate(|x| Ok(g(x)? * x.powi(k)), lo, hi, cfg)?)),
        Weight::Log if lo == 0.0 => Ok(real(try_integrate_log(g, lo, hi, LogEnd::Left, cfg)?)),
        Weight::Log => Ok(real(try_integrate(|x| Ok(g(x)? * x.ln()), lo, hi, cfg)?)),
    }
}

fn check_order<S: Smooth>(t: DistTerm, psi: &S) -> Result<()> {
    let needed = t.pairing_order();
    if needed > psi.max_order() {
        Err(Error::UnsupportedOrder {
            order: needed,
            max: psi.max_order(),
        })
    } else {
        Ok(())
    }
}

/// `⟨t, ψ⟩` for one catalogue term.
pub fn pair_term<S: Smooth>(t: DistTerm, psi: &S, cfg: &QuadConfig) -> Result<f64> {
    use DistTerm::*;
    check_order(t, psi)?;
    let sgn = |p: u32| if p.is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(match t.canonical() {
        DeltaDeriv(p) => sgn(p) * psi.deriv(p as usize, 0.0)?,
        HeavisidePlus => half_line(psi, 0, Weight::Pow(0), true, cfg)?,
        HeavisideMinus => half_line(psi, 0, Weight::Pow(0), false, cfg)?,
        XPlusPow(k) if k > 0 => half_line(psi, 0, Weight::Pow(k), true, cfg)?,
        XMinusPow(k) if k > 0 => half_line(psi, 0, Weight::Pow(k), false, cfg)?,
        XPlusPow(k) => {
            let p = (-k - 1) as u32;
            let pf = factorial(p as usize);
            -half_line(psi, p as usize + 1, Weight::Log, true, cfg)? / pf
                + sigma(p) * psi.deriv(p as usize, 0.0)? / pf
        }
        XMinusPow(k) => {
            let p = (-k - 1) as u32;
            let pf = factorial(p as usize);
            // ∫_{-∞}^0 ln(-x) ψ^{(p+1)}(x) dx
            let log_int = half_line(psi, p as usize + 1, Weight::Log, false, cfg)?;
            sgn(p) * log_int / pf + sgn(p) * sigma(p) * psi.deriv(p as usize, 0.0)? / pf
        }
        XPow(k) => {
            let p = (-k) as usize;
            let both = half_line(psi, p, Weight::Log, true, cfg)?
                + half_line(psi, p, Weight::Log, false, cfg)?;
            -both / factorial(p - 1)
        }
        LogPlus => half_line(psi, 0, Weight::Log, true, cfg)?,
        LogMinus => half_line(psi, 0, Weight::Log, false, cfg)?,
        LogAbs => {
            half_line(psi, 0, Weight::Log, true, cfg)? + half_line(psi, 0, Weight::Log, false, cfg)?
        }
    })
}

pub fn oracle_pair_with<S: Smooth>(
    u: &LinearCombo,
    psi: &S,
    cfg: &QuadConfig,
) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for &(c, t) in u.terms() {
        acc += c * pair_term(t, psi, cfg)?;
    }
    Ok(acc)
}

pub fn oracle_pair<S: Smooth>(u: &LinearCombo, psi: &S) -> Result<Complex64> {
    oracle_pair_with(u, psi, &oracle_cfg())
}

/// `⟨x_+^a, ψ⟩` for non-integer `a`, through `x_+^a = ∂^r x_+^{a+r} / ((a+1)···(a+r))`
/// with `a + r ≥ 0`.
pub fn continued_xplus_pairing<S: Smooth>(a: f64, psi: &S) -> Result<f64> {
    if a.fract() == 0.0 && a < 0.0 {
        return Err(Error::Domain(format!("x_+^a has a pole at a = {a}")));
    }
    let r = if a >= 0.0 { 0 } else { (-a).ceil() as usize };
    if r > psi.max_order() {
        return Err(Error::UnsupportedOrder {
            order: r,
            max: psi.max_order(),
        });
    }
    let (lo, hi) = psi.support();
    let (lo, hi) = (lo.max(0.0), hi.max(0.0));
    if hi <= lo {
        return Ok(0.0);
    }
    let b = a + r as f64;
    let integral = real(try_integrate(
        |x| Ok(d(psi, r, x)? * if x > 0.0 { x.powf(b) } else { 0.0 }),
        lo,
        hi,
        &oracle_cfg(),
    )?);
    let denom: f64 = (1..=r).map(|j| a + j as f64).product();
    let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
    Ok(sign * integral / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist_core::{decompose_xpow, derive, reflect};
    use crate::smooth_kit::{Derivative, TestFunction};
    use std::f64::consts::PI;

    fn psis() -> Vec<TestFunction> {
        TestFunction::defaults()
    }

    #[test]
    fn delta_derivative_pairing() {
        let psi = TestFunction::generic();
        let v = oracle_pair(&LinearCombo::single(DistTerm::DeltaDeriv(1)), &psi).unwrap();
        assert!((v.re + psi.eval(1, 0.0).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn inverse_x_plus_on_even_psi() {
        // For even ψ the finite part of ∫_0^∞ ψ/x is also -∫_0^∞ ln x ψ'.
        // Independent route: integrate ψ(x)/x − ψ(0)/x on (0, 1) and ψ/x on (1, ∞),
        // then add the finite part of -ψ(0) ln x evaluated at 1 (which is zero).
        let psi = TestFunction::even();
        let v = oracle_pair(&LinearCombo::single(DistTerm::XPlusPow(-1)), &psi)
            .unwrap()
            .re;
        let p0 = psi.eval(0, 0.0).unwrap();
        let n = 200_000;
        let h = 1.0 / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let x = (i as f64 + 0.5) * h;
            acc += (psi.eval(0, x).unwrap() - p0) / x;
        }
        let oracle = acc * h;
        assert!((v - oracle).abs() < 1e-8, "{v} vs {oracle}");
    }

    #[test]
    fn x_plus_i0_expansion() {
        let psi = TestFunction::even();
        let u = LinearCombo::x_plus_minus_i0(0, true);
        let v = oracle_pair(&u, &psi).unwrap();
        let x1 = oracle_pair(&LinearCombo::single(DistTerm::XPow(-1)), &psi).unwrap();
        assert!((v.re - x1.re).abs() < 1e-14);
        assert!((v.im + PI * (-1.0f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn decomposition_cross_check() {
        for psi in psis() {
            for p in 1..=4 {
                let a = oracle_pair(&decompose_xpow(p).unwrap(), &psi).unwrap();
                let b =
                    oracle_pair(&LinearCombo::single(DistTerm::XPow(-(p as i32))), &psi).unwrap();
                assert!(
                    (a - b).norm() < 1e-8 * b.norm().max(1.0),
                    "p={p}: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn derivative_duality() {
        for psi in psis() {
            let dpsi = Derivative(&psi, 1);
            for t in DistTerm::catalogue(4) {
                let lhs = oracle_pair(&derive(t), &psi).unwrap();
                let rhs = -oracle_pair(&LinearCombo::single(t), &dpsi).unwrap();
                assert!(
                    (lhs - rhs).norm() < 1e-8 * rhs.norm().max(1.0),
                    "{t} {}: {lhs} vs {rhs}",
                    psi.id()
                );
            }
        }
    }

    #[test]
    fn reflection_duality() {
        for psi in psis() {
            let check = psi.reflected();
            for t in DistTerm::catalogue(4) {
                let (s, r) = reflect(t);
                let lhs = s * pair_term(r, &psi, &oracle_cfg()).unwrap();
                let rhs = pair_term(t, &check, &oracle_cfg()).unwrap();
                assert!(
                    (lhs - rhs).abs() < 1e-8 * rhs.abs().max(1.0),
                    "{t}: {lhs} vs {rhs}"
                );
            }
        }
    }

    #[test]
    fn linearity() {
        let psi = TestFunction::generic();
        let u = LinearCombo::from_real(vec![(1.0, DistTerm::XPow(-2)), (0.5, DistTerm::LogAbs)]);
        let v = LinearCombo::from_terms(vec![(Complex64::new(0.0, 2.0), DistTerm::XMinusPow(-1))]);
        let a = Complex64::new(1.5, -0.25);
        let b = Complex64::new(-2.0, 0.0);
        let lhs = oracle_pair(&u.scale(a).add(&v.scale(b)), &psi).unwrap();
        let rhs = a * oracle_pair(&u, &psi).unwrap() + b * oracle_pair(&v, &psi).unwrap();
        assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm());
    }

    #[test]
    fn hormander_residue() {
        for psi in psis() {
            for p in 0..=3u32 {
                let pf = factorial(p as usize);
                let residue = psi.eval(p as usize, 0.0).unwrap() / pf;
                let etas = [1e-2, 5e-3, 2.5e-3];
                let vals: Vec<f64> = etas
                    .iter()
                    .map(|&eta| {
                        continued_xplus_pairing(-(p as f64) - 1.0 + eta, &psi).unwrap()
                            - residue / eta
                    })
                    .collect();
                // Linear fit in η through the three points, evaluated at η = 0.
                let n = 3.0;
                let sx: f64 = etas.iter().sum();
                let sy: f64 = vals.iter().sum();
                let sxx: f64 = etas.iter().map(|e| e * e).sum();
                let sxy: f64 = etas.iter().zip(&vals).map(|(e, v)| e * v).sum();
                let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
                let intercept = (sy - slope * sx) / n;
                let exact =
                    pair_term(DistTerm::XPlusPow(-(p as i32) - 1), &psi, &oracle_cfg()).unwrap();
                assert!(
                    (intercept - exact).abs() < 1e-3 * exact.abs().max(1.0),
                    "p={p}: {intercept} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn order_guard() {
        let psi = TestFunction::with_max_order("low", vec![1.0], 0.0, 1.0, 2).unwrap();
        let err = oracle_pair(&LinearCombo::single(DistTerm::XPlusPow(-3)), &psi).unwrap_err();
        assert!(matches!(err, Error::UnsupportedOrder { order: 3, max: 2 }));
    }
}
