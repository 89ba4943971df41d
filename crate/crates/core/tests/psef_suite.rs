mod common;

use common::*;
use proptest::prelude::*;
use qpos_core::corpus::{generate_instance, run_corpus, CorpusSpec};
use qpos_core::linalg::{real_diagonal, CMatrix};
use qpos_core::psef::Statement;
use qpos_core::{
    dual_not_psef_test, equivalence_suite, torus_psef_oracle, LineBundleMetric, Tolerances,
    TorusGeometry,
};

#[test]
fn oracle_examples() {
    let g = TorusGeometry::uniform(2, 4).unwrap();
    assert!(torus_psef_oracle(
        &LineBundleMetric::flat_weight(&g, CMatrix::zeros(2, 2)).unwrap()
    ));
    assert!(!torus_psef_oracle(
        &LineBundleMetric::flat_weight(&g, real_diagonal(&[1.0, -5.0])).unwrap()
    ));
    assert!(torus_psef_oracle(
        &LineBundleMetric::flat_weight(&g, real_diagonal(&[1.0, 0.0])).unwrap()
    ));
}

#[test]
fn dual_test_examples() {
    let g = TorusGeometry::uniform(2, 8).unwrap();
    let tol = Tolerances::default();
    let t = dual_not_psef_test(
        &LineBundleMetric::flat_weight(&g, real_diagonal(&[1.0, -5.0])).unwrap(),
        &tol,
    )
    .unwrap();
    assert!(t.dual_not_psef);
    let witness = t.witness.unwrap().try_inverse().unwrap();
    assert!((witness[(0, 0)].re - 1.0).abs() < 1e-12);
    assert!(witness[(1, 1)].re < 0.2);
    let t = dual_not_psef_test(
        &LineBundleMetric::flat_weight(&g, -CMatrix::identity(2, 2)).unwrap(),
        &tol,
    )
    .unwrap();
    assert!(!t.dual_not_psef);
    assert!(t.witness.is_none());
}

#[test]
fn suite_examples() {
    let g = TorusGeometry::uniform(2, 8).unwrap();
    let tol = Tolerances::default();
    for (diag, expected) in [
        ([1.0, -5.0], true),
        ([-1.0, -1.0], false),
        ([0.0, 0.0], false),
    ] {
        let report = equivalence_suite(
            &LineBundleMetric::flat_weight(&g, real_diagonal(&diag)).unwrap(),
            &tol,
        )
        .unwrap();
        assert_eq!(report.verdicts(), [expected; 4], "{diag:?}");
        assert!(report.pass);
        let statements: Vec<Statement> = report.items.iter().map(|i| i.statement).collect();
        assert_eq!(
            statements,
            [
                Statement::DualNotPseudoEffective,
                Statement::PositiveGauduchonDegree,
                Statement::PositiveScalarCurvature,
                Statement::NMinusOnePositive
            ]
        );
    }
}

#[test]
fn report_serializes_items_and_witness() {
    let g = TorusGeometry::uniform(2, 4).unwrap();
    let mut report = equivalence_suite(
        &LineBundleMetric::flat_weight(&g, real_diagonal(&[1.0, -5.0])).unwrap(),
        &Tolerances::default(),
    )
    .unwrap();
    report.seed = Some(9);
    let json: serde_json::Value = serde_json::to_value(&report).unwrap();
    assert_eq!(json["items"].as_array().unwrap().len(), 4);
    assert_eq!(json["items"][0]["statement"], "dual_not_pseudo_effective");
    assert_eq!(json["pass"], true);
    assert_eq!(json["seed"], 9);
    assert_eq!(json["witness_metric"].as_array().unwrap().len(), 2);
}

#[test]
fn corpus_rows_are_ordered_and_complete() {
    let spec = CorpusSpec::standard(24, 7);
    let report = run_corpus(&spec).unwrap();
    assert_eq!(
        report.rows.iter().map(|r| r.index).collect::<Vec<_>>(),
        (0..24).collect::<Vec<_>>()
    );
    assert_eq!(report.summary().failed, 0);
    let positives = report.rows.iter().filter(|r| r.dual_not_psef).count();
    assert!(positives > 0 && positives < 24);
    let first = generate_instance(&spec, 0).unwrap();
    assert_eq!(report.rows[0].weight, first.weight);
}

fn suite(b: &LineBundleMetric) -> qpos_core::SuiteReport {
    equivalence_suite(b, &Tolerances::default()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn verdicts_are_monotone_under_psd_shifts(seed in 0u64..100_000) {
        let mut rng = rng(seed);
        let g = TorusGeometry::uniform(2, 8).unwrap();
        let r = random_hermitian(&mut rng, 2, 2.0);
        let phi = TrigPolynomial::random(&mut rng, 4, 3, 2, 1.0).sample(&g);
        let base = suite(&bundle(r.clone(), phi.clone()));
        prop_assert!(base.pass);
        if base.consensus() == Some(true) {
            let a = gaussian_matrix(&mut rng, 2);
            let shifted = suite(&bundle(r + &a * a.adjoint(), phi));
            prop_assert!(shifted.pass);
            prop_assert_eq!(shifted.consensus(), Some(true));
        }
    }

    #[test]
    fn verdicts_are_scale_invariant(seed in 0u64..100_000, t in prop::sample::select(vec![1e-2, 0.5, 3.0, 1e2])) {
        let mut rng = rng(seed);
        let g = TorusGeometry::uniform(2, 8).unwrap();
        let spectrum = [rng_value(&mut rng), rng_value(&mut rng)];
        let r = with_spectrum(&mut rng, &spectrum);
        let phi = TrigPolynomial::random(&mut rng, 4, 3, 2, 1.0).sample(&g);
        let a = suite(&bundle(r.clone(), phi.clone()));
        let b = suite(&bundle(r.map(|z| z * t), phi.scale(t).unwrap()));
        prop_assert!(a.pass && b.pass);
        prop_assert_eq!(a.verdicts(), b.verdicts());
    }

    #[test]
    fn weight_perturbations_do_not_change_verdicts(seed in 0u64..100_000) {
        let mut rng = rng(seed);
        let g = TorusGeometry::uniform(2, 8).unwrap();
        let spectrum = [rng_value(&mut rng), rng_value(&mut rng)];
        let r = with_spectrum(&mut rng, &spectrum);
        let flat = LineBundleMetric::flat_weight(&g, r.clone()).unwrap();
        let weighted = bundle(r, TrigPolynomial::random(&mut rng, 4, 5, 3, 3.0).sample(&g));
        let tol = Tolerances::default();
        prop_assert_eq!(
            dual_not_psef_test(&flat, &tol).unwrap().dual_not_psef,
            dual_not_psef_test(&weighted, &tol).unwrap().dual_not_psef
        );
        prop_assert_eq!(suite(&flat).verdicts(), suite(&weighted).verdicts());
    }
}

/// Eigenvalue of magnitude in `[0.1, 10]` with random sign, or zero.
fn rng_value(rng: &mut rand_chacha::ChaCha8Rng) -> f64 {
    use rand::Rng;
    if rng.random_bool(0.15) {
        0.0
    } else {
        let m = 10f64.powf(rng.random_range(-1.0..1.0));
        if rng.random_bool(0.5) {
            m
        } else {
            -m
        }
    }
}
