use num_traits::Zero;
use pfister_core::arith::{int, Rational};
use pfister_core::linalg::{self, Matrix};
use pfister_core::qform::QuadraticForm;
use pfister_core::quat::QuaternionAlgebra;
use pfister_core::shapiro4::{
    make_u, run_batch, run_scenario, verify_u, Branch, Scenario, Setting, ShapiroError, UInput, DIM,
};

fn hyperbolic_sample() -> Scenario {
    (0..60)
        .map(Scenario::sample)
        .find(|sc| make_u(sc).is_ok())
        .expect("an isotropic sample among the first seeds")
}

/// The u of a sample together with the element m such that u·m·γ(m) is scalar.
fn sample_input() -> (Scenario, UInput) {
    let sc = hyperbolic_sample();
    let n = make_u(&sc).unwrap();
    let s = Setting::new(&sc.q1, &sc.q2).unwrap();
    let m = s.mul(&s.inverse(&s.gamma(&n.y)).unwrap(), &sc.c);
    let input = UInput {
        q1: sc.q1.clone(),
        q2: sc.q2.clone(),
        u: n.u.u.clone(),
        c: Some(m),
    };
    (sc, input)
}

#[test]
fn scaling_u_scales_lambda_and_the_gram_matrix() {
    let (sc, input) = sample_input();
    let base = verify_u(&input, b"base").unwrap();
    assert!(base.report.verdict.pass);
    for mu in [int(-1), int(3), Rational::new(2.into(), 5.into())] {
        let scaled = UInput {
            u: linalg::vec_scale(&input.u, &mu),
            ..input.clone()
        };
        let rep = verify_u(&scaled, b"scaled").unwrap();
        assert!(rep.report.verdict.pass, "{:?}", rep.report.verdict.failures);
        assert_eq!(rep.lambda, Some(&sc.lambda * &mu));
        let expected: Vec<Vec<Rational>> = base
            .report
            .gram
            .iter()
            .map(|row| linalg::vec_scale(row, &mu))
            .collect();
        assert_eq!(rep.report.gram, expected);
    }
}

#[test]
fn q_u_invariants_match_an_independent_recomputation() {
    let batch = run_batch(4, 3);
    for r in &batch.scenarios {
        assert!(r.verdict.pass, "seed {}: {:?}", r.scenario.seed, r.verdict.failures);
        let q = QuadraticForm::new(Matrix::from_rows(r.gram.clone())).unwrap();
        assert_eq!(q.dim(), DIM);
        let inv = q.invariants().unwrap();
        assert!(inv.disc.is_trivial());
        assert!(inv.clifford.is_trivial());
        assert!(q.in_i_n(3).unwrap());
        if r.branch == Some(Branch::Hyperbolic) {
            assert_eq!(r.isometry_check, Some(true));
            // The Lagrangian is totally isotropic for the reported Gram matrix.
            assert_eq!(r.lagrangian.len(), DIM / 2);
            for x in &r.lagrangian {
                for y in &r.lagrangian {
                    assert!(q.polar(x, y).is_zero());
                }
            }
        }
    }
}

#[test]
fn scenario_json_round_trip_gives_the_same_report() {
    let sc = hyperbolic_sample();
    let text = serde_json::to_string(&sc).unwrap();
    let back: Scenario = serde_json::from_str(&text).unwrap();
    assert_eq!(back, sc);
    assert_eq!(run_scenario(&back).unwrap(), run_scenario(&sc).unwrap());
}

#[test]
fn singular_c_is_rejected() {
    let mut sc = Scenario::sample(1);
    sc.c = vec![int(0); DIM];
    assert!(matches!(run_scenario(&sc), Err(ShapiroError::Validation(_))));
}

#[test]
fn non_symmetric_u_is_rejected() {
    let (_, input) = sample_input();
    let mut u = input.u.clone();
    u[1] += int(1);
    let bad = UInput { u, ..input };
    let s = Setting::new(&bad.q1, &bad.q2).unwrap();
    // γ(1⊗i) = −1⊗i, so the perturbation breaks symmetry.
    assert_ne!(s.gamma(&bad.u), bad.u);
    assert!(matches!(verify_u(&bad, b""), Err(ShapiroError::Validation(_))));
}

#[test]
fn split_factors_still_give_a_pfister_form() {
    let sc = Scenario {
        seed: 0,
        q1: QuaternionAlgebra::from_i64(1, 1).unwrap(),
        q2: QuaternionAlgebra::from_i64(-1, 2).unwrap(),
        c: linalg::unit_vector(DIM, 0),
        lambda: int(1),
    };
    let r = run_scenario(&sc).unwrap();
    assert!(r.verdict.pass, "{:?}", r.verdict.failures);
}
