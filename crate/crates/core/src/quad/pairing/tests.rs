use std::f64::consts::PI;

use super::*;
use crate::dist_core::{oracle_pair, DistTerm, LinearCombo};
use crate::embedding::{embed, Embedder, TermRep};
use crate::quad::{integrate, try_integrate_pieces};
use crate::smooth_kit::{MollifierSpec, Smooth, Variant};

fn embedder(q: usize, v: Variant) -> Embedder {
    Embedder::new(MollifierSpec::standard(q, v).unwrap())
}

fn cfg() -> QuadConfig {
    QuadConfig::default()
}

fn single(t: DistTerm, e: &Embedder) -> EmbeddedProduct {
    embed(&LinearCombo::single(t), e).unwrap().to_product()
}

fn product(e: &Embedder, summands: Vec<(Complex64, Vec<DistTerm>, u32)>) -> EmbeddedProduct {
    let summands = summands
        .into_iter()
        .map(|(coeff, f, monomial)| EmbeddedSummand {
            coeff,
            factors: f.into_iter().map(|t| TermRep::new(t).unwrap()).collect(),
            monomial,
        })
        .collect();
    EmbeddedProduct::new(e.clone(), summands).unwrap()
}

fn mik(e: &Embedder) -> EmbeddedProduct {
    product(
        e,
        vec![
            (
                Complex64::new(1.0, 0.0),
                vec![DistTerm::XPow(-1), DistTerm::XPow(-1)],
                0,
            ),
            (
                Complex64::new(-PI * PI, 0.0),
                vec![DistTerm::DeltaDeriv(0), DistTerm::DeltaDeriv(0)],
                0,
            ),
        ],
    )
}

#[test]
fn delta_tends_to_point_value() {
    let e = embedder(1, Variant::Plain);
    let p = single(DistTerm::DeltaDeriv(0), &e);
    let psi = TestFunction::generic();
    let target = psi.eval(0, 0.0).unwrap();
    let mut last = f64::INFINITY;
    for eps in [0.1, 0.05, 0.025] {
        let v = pair_at_eps(&p, &psi, eps, &cfg()).unwrap();
        assert!(v.divergent.is_empty());
        let gap = (v.total().re - target).abs();
        assert!(gap < last && gap <= 0.5 * eps, "{eps}: {gap}");
        last = gap;
    }
}

#[test]
fn heaviside_tends_to_half_line_integral() {
    let e = embedder(1, Variant::Weighted);
    let p = single(DistTerm::HeavisidePlus, &e);
    let psi = TestFunction::even();
    let want = integrate(|x| psi.eval(0, x).unwrap(), 0.0, 1.0, &cfg())
        .unwrap()
        .re();
    for eps in [0.1, 0.05] {
        let got = pair_at_eps(&p, &psi, eps, &cfg()).unwrap().total().re;
        assert!((got - want).abs() <= eps, "{got} vs {want}");
    }
}

#[test]
fn single_terms_need_no_divergent_part() {
    let e = embedder(3, Variant::Plain);
    for t in [
        DistTerm::XPow(-3),
        DistTerm::XPlusPow(-4),
        DistTerm::XMinusPow(-2),
        DistTerm::DeltaDeriv(2),
    ] {
        let p = single(t, &e);
        assert!(
            divergence_certificate(&p, &cfg())
                .unwrap()
                .iter()
                .all(|c| c.cancels(1e-9)),
            "{t}"
        );
        for psi in TestFunction::defaults() {
            let oracle = oracle_pair(&LinearCombo::single(t), &psi).unwrap();
            let v = pair_at_eps(&p, &psi, 0.01, &cfg()).unwrap();
            assert!(v.converged);
            let gap = (v.total() - oracle).norm();
            assert!(
                gap <= 1e-3 * oracle.norm().max(1.0),
                "{t} {}: {} vs {oracle}",
                psi.id(),
                v.total()
            );
        }
    }
}

#[test]
fn split_pairing_matches_direct_quadrature() {
    let e = embedder(2, Variant::Plain);
    let psi = TestFunction::generic();
    let eps = 0.1;
    let l = e.radius();
    for p in [mik(&e), single(DistTerm::XPlusPow(-3), &e)] {
        let v = pair_at_eps(&p, &psi, eps, &cfg()).unwrap();
        let (a, b) = psi.support();
        let direct = try_integrate_pieces(
            |x| Ok(p.eval(eps, x)? * psi.eval(0, x)?),
            &[a, -eps * l, 0.0, eps * l, b],
            &QuadConfig::with_tolerances(1e-12, 1e-14),
        )
        .unwrap();
        let gap = (v.total() - direct.value).norm();
        assert!(
            gap <= 1e-8 * direct.value.norm().max(1.0),
            "{} vs {}",
            v.total(),
            direct.value
        );
    }
}

#[test]
fn mikusinski_moments_cancel() {
    for v in [Variant::Plain, Variant::Weighted] {
        let e = embedder(2, v);
        let checks = divergence_certificate(&mik(&e), &cfg()).unwrap();
        assert!(!checks.is_empty());
        for c in &checks {
            assert!(c.cancels(1e-8), "{c:?}");
        }
        // Either product alone does not cancel.
        let lone = product(
            &e,
            vec![(
                Complex64::new(1.0, 0.0),
                vec![DistTerm::XPow(-1), DistTerm::XPow(-1)],
                0,
            )],
        );
        assert!(divergence_certificate(&lone, &cfg())
            .unwrap()
            .iter()
            .any(|c| !c.cancels(1e-8)));
    }
}

#[test]
fn ramp_times_delta_derivative_is_finite() {
    let e = embedder(2, Variant::Plain);
    let p = product(
        &e,
        vec![(
            Complex64::new(1.0, 0.0),
            vec![DistTerm::XPlusPow(1), DistTerm::DeltaDeriv(1)],
            0,
        )],
    );
    let psi = TestFunction::odd_shifted();
    let v = pair_at_eps(&p, &psi, 0.05, &cfg()).unwrap();
    assert!(v.divergent.is_empty());
    let target = -0.5 * psi.eval(0, 0.0).unwrap();
    assert!((v.total().re - target).abs() < 0.1 * target.abs());
}

#[test]
fn deterministic_and_plan_reuse() {
    let e = embedder(2, Variant::Weighted);
    let p = mik(&e);
    let psi = TestFunction::odd_shifted();
    let a = pair_at_eps(&p, &psi, 0.025, &cfg()).unwrap();
    let plan = PairingPlan::new(&p, &cfg()).unwrap();
    let b = plan.pair(&psi, 0.025, &cfg()).unwrap();
    assert_eq!(a, b);
    assert!(matches!(
        plan.pair(&psi, 0.0, &cfg()),
        Err(crate::Error::Domain(_))
    ));
}
