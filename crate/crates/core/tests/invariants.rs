use colombeau_core::assoc::{
    build_formula, check_association, AssociationVerdict, Schedule, Tolerances,
};
use colombeau_core::cli::{run_suite, FormulaSelection, SuiteConfig};
use colombeau_core::embedding::Embedder;
use colombeau_core::quad::QuadConfig;
use colombeau_core::smooth_kit::{MollifierSpec, TestFunction, Variant};
use colombeau_core::Complex64;
use proptest::prelude::*;

fn limit(v: &AssociationVerdict) -> (Complex64, f64) {
    (v.limit_estimate.unwrap(), v.uncertainty.unwrap())
}

/// Fit uncertainties can undershoot once the values reach round-off.
fn floor(z: Complex64) -> f64 {
    1e-12 * z.norm().max(1.0)
}

#[test]
fn limits_do_not_depend_on_the_mollifier() {
    let sel = |id: &str, p: Option<Vec<i32>>, q: Option<Vec<u32>>| FormulaSelection {
        id: id.into(),
        p,
        q,
    };
    let cfg = SuiteConfig {
        formulas: vec![
            sel("MIK", None, None),
            sel("TH1+", Some(vec![0, 2]), None),
            sel("TH2-", Some(vec![1]), None),
            sel("COR2+", Some(vec![1]), None),
            sel("XPDQ", Some(vec![1]), Some(vec![2])),
        ],
        ..SuiteConfig::default()
    };
    let report = run_suite(&cfg).unwrap();
    assert!(report.summary.pass);
    // Records are sorted with the mollifier last, so variants of one case are adjacent.
    for pair in report.records.chunks(2) {
        let [a, b] = pair else {
            panic!("odd record count")
        };
        assert_eq!(
            (&a.formula_id, a.params, &a.psi),
            (&b.formula_id, b.params, &b.psi)
        );
        assert_ne!(a.mollifier, b.mollifier);
        let ((la, ua), (lb, ub)) = (limit(a), limit(b));
        assert!(
            (la - lb).norm() <= 3.0 * (ua + ub) + floor(la),
            "{} {:?} {}: {la} ± {ua:.1e} vs {lb} ± {ub:.1e}",
            a.formula_id,
            a.params,
            a.psi
        );
    }
}

fn embedders(q: usize) -> Vec<Embedder> {
    [Variant::Plain, Variant::Weighted]
        .into_iter()
        .map(|v| Embedder::new(MollifierSpec::standard(q, v).unwrap()))
        .collect()
}

#[test]
fn reflection_swaps_the_th1_signs() {
    let psis = TestFunction::defaults();
    let reflected: Vec<TestFunction> = psis.iter().map(TestFunction::reflected).collect();
    for p in 0..=3 {
        let embs = embedders(p as usize + 1);
        let run = |id: &str, psis: &[TestFunction]| {
            let f = build_formula(id, Some(p), None).unwrap();
            check_association(
                &f,
                psis,
                &embs,
                &Tolerances::default(),
                &Schedule::default(),
                &QuadConfig::default(),
            )
            .unwrap()
        };
        let plus = run("TH1+", &psis);
        let minus = run("TH1-", &reflected);
        for (a, b) in plus.iter().zip(&minus) {
            assert!(a.pass && b.pass);
            let ((la, ua), (lb, ub)) = (limit(a), limit(b));
            assert!(
                (la - lb).norm() <= 3.0 * (ua + ub) + floor(la),
                "p={p} {}: {la} vs {lb}",
                a.psi
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 6, ..ProptestConfig::default() })]

    #[test]
    fn limits_are_linear_in_the_test_function(
        a in -2.0f64..2.0,
        b in -2.0f64..2.0,
        p1 in prop::collection::vec(-1.0f64..1.0, 1..4),
        p2 in prop::collection::vec(-1.0f64..1.0, 1..4),
        center in -0.3f64..0.3,
    ) {
        let radius = 1.2;
        let mut p = vec![0.0; p1.len().max(p2.len())];
        for (i, c) in p1.iter().enumerate() {
            p[i] += a * c;
        }
        for (i, c) in p2.iter().enumerate() {
            p[i] += b * c;
        }
        let psis = vec![
            TestFunction::new("psi1", p1, center, radius).unwrap(),
            TestFunction::new("psi2", p2, center, radius).unwrap(),
            TestFunction::new("combined", p, center, radius).unwrap(),
        ];
        let f = build_formula("TH2+", Some(1), None).unwrap();
        let embs = embedders(2);
        let v = check_association(&f, &psis, &embs[..1], &Tolerances::default(), &Schedule::default(), &QuadConfig::default())
            .unwrap();
        let (l1, u1) = limit(&v[0]);
        let (l2, u2) = limit(&v[1]);
        let (l, u) = limit(&v[2]);
        let expect = l1 * a + l2 * b;
        let slack = 3.0 * (u + a.abs() * u1 + b.abs() * u2) + 1e-12 * (a.abs() * l1.norm() + b.abs() * l2.norm()).max(1.0);
        prop_assert!((l - expect).norm() <= slack, "{} vs {}", l, expect);
    }
}
