use num_complex::Complex64;

use crate::error::Result;
use crate::quad::{try_integrate, try_integrate_log, LogEnd, QuadConfig};
use crate::smooth_kit::poly::{binomial, factorial, falling, gbinomial};
use crate::smooth_kit::MollifierSpec;

use super::{Base, Side};

/// Beyond `SERIES_RATIO · l` the moment expansion replaces quadrature.
pub(super) const SERIES_RATIO: f64 = 8.0;

fn sign(n: usize) -> f64 {
    if n.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

fn real(v: f64) -> Result<Complex64> {
    Ok(Complex64::new(v, 0.0))
}

/// `(-1)ⁿ ∫ g(v + w) φ⁽ⁿ⁾(v) dv` for `|w| < l`, split at the singular point `v = -w`.
pub(super) fn near(
    spec: &MollifierSpec,
    base: Base,
    n: usize,
    w: f64,
    cfg: &QuadConfig,
) -> Result<[f64; 2]> {
    let l = spec.support();
    let sn = sign(n);
    let phi_n = |v: f64| spec.phi_deriv(n, v);
    let plus_log = || -> Result<[f64; 2]> {
        let c0 = try_integrate_log(|v| real(phi_n(v)), -w, l, LogEnd::Left, cfg)?.re();
        let c1 = if n >= 1 {
            -spec.phi_deriv(n - 1, -w)
        } else {
            try_integrate(|v| real(phi_n(v)), -w, l, cfg)?.re()
        };
        Ok([sn * c0, sn * c1])
    };
    let minus_log = || -> Result<[f64; 2]> {
        let c0 = try_integrate_log(|v| real(phi_n(v)), -l, -w, LogEnd::Right, cfg)?.re();
        let c1 = if n >= 1 {
            spec.phi_deriv(n - 1, -w)
        } else {
            try_integrate(|v| real(phi_n(v)), -l, -w, cfg)?.re()
        };
        Ok([sn * c0, sn * c1])
    };
    Ok(match base {
        Base::Log(Side::Plus) => plus_log()?,
        Base::Log(Side::Minus) => minus_log()?,
        Base::Log(Side::Abs) => {
            let a = plus_log()?;
            let b = minus_log()?;
            [a[0] + b[0], a[1] + b[1]]
        }
        Base::Pow(Side::Minus, k) => {
            let f = |v: f64| real((-v - w).powi(k as i32) * phi_n(v));
            [sn * try_integrate(f, -l, -w, cfg)?.re(), 0.0]
        }
        Base::Pow(_, k) => {
            let f = |v: f64| real((v + w).powi(k as i32) * phi_n(v));
            [sn * try_integrate(f, -w, l, cfg)?.re(), 0.0]
        }
    })
}

/// Shape for `|w| ≥ l`, where the base function is smooth on the whole kernel support
/// (or the support misses it entirely).
pub(super) fn far(
    spec: &MollifierSpec,
    base: Base,
    n: usize,
    w: f64,
    cfg: &QuadConfig,
) -> Result<[f64; 2]> {
    let side = match base {
        Base::Log(s) | Base::Pow(s, _) => s,
    };
    let outside = match side {
        Side::Plus => w < 0.0,
        Side::Minus => w > 0.0,
        Side::Abs => false,
    };
    if outside {
        return Ok([0.0, 0.0]);
    }
    match base {
        Base::Pow(s, k) => {
            let k = k as usize;
            if n > k {
                return Ok([0.0, 0.0]);
            }
            let d = falling(k as f64, n) * if s == Side::Minus { sign(k) } else { 1.0 };
            Ok([d * power_average(spec, k as i32 - n as i32, w, cfg)?, 0.0])
        }
        Base::Log(_) => {
            if n == 0 {
                Ok([log_average(spec, w, cfg)?, spec.raw_moments()[0]])
            } else {
                let d = sign(n - 1) * factorial(n - 1);
                Ok([d * power_average(spec, -(n as i32), w, cfg)?, 0.0])
            }
        }
    }
}

/// `∫ (w + v)^e φ(v) dv` for `|w| ≥ l`.
fn power_average(spec: &MollifierSpec, e: i32, w: f64, cfg: &QuadConfig) -> Result<f64> {
    let m = spec.raw_moments();
    if e >= 0 {
        let e = e as usize;
        return Ok((0..=e)
            .map(|i| binomial(e, i) * w.powi((e - i) as i32) * m[i])
            .sum());
    }
    let l = spec.support();
    if w.abs() >= SERIES_RATIO * l {
        let mut acc = 0.0;
        for (i, mi) in m.iter().enumerate() {
            acc += gbinomial(e as f64, i) * mi * w.powi(e - i as i32);
        }
        return Ok(acc);
    }
    let f = |v: f64| real((w + v).powi(e) * spec.phi(v));
    Ok(try_integrate(f, -l, l, cfg)?.re())
}

/// `∫ ln|w + v| φ(v) dv` for `|w| ≥ l`.
fn log_average(spec: &MollifierSpec, w: f64, cfg: &QuadConfig) -> Result<f64> {
    let m = spec.raw_moments();
    let l = spec.support();
    if w.abs() >= SERIES_RATIO * l {
        let mut acc = w.abs().ln() * m[0];
        for (i, mi) in m.iter().enumerate().skip(1) {
            acc += sign(i + 1) / i as f64 * mi * w.powi(-(i as i32));
        }
        return Ok(acc);
    }
    let f = |v: f64| real((w + v).abs().ln() * spec.phi(v));
    Ok(try_integrate(f, -l, l, cfg)?.re())
}
