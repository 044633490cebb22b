mod common;

use pfister_core::arith::{
    brauer_add, brauer_class_of_symbol, candidate_places, hilbert_symbol, int, rat, square_class, Factorizer, Place,
};
use pfister_core::csa::clifford_algebra;
use pfister_core::qform::QuadraticForm;
use pfister_core::quat::QuaternionAlgebra;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn nonzero(bound: i64) -> impl Strategy<Value = i64> {
    (-bound..=bound).prop_filter("nonzero", |x| *x != 0)
}

fn places_for(xs: &[i64]) -> Vec<Place> {
    let rs: Vec<_> = xs.iter().map(|&x| int(x)).collect();
    let refs: Vec<_> = rs.iter().collect();
    candidate_places(&refs, &Factorizer::default()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hilbert_reciprocity(a in nonzero(200), b in nonzero(200)) {
        let prod: i32 = places_for(&[a, b])
            .iter()
            .map(|v| hilbert_symbol(&int(a), &int(b), v).unwrap() as i32)
            .product();
        prop_assert_eq!(prod, 1);
    }

    #[test]
    fn hilbert_symmetry_and_norm_relation(a in nonzero(100), b in nonzero(100)) {
        for v in places_for(&[a, b]) {
            prop_assert_eq!(hilbert_symbol(&int(a), &int(b), &v).unwrap(), hilbert_symbol(&int(b), &int(a), &v).unwrap());
            prop_assert_eq!(hilbert_symbol(&int(a), &int(-a), &v).unwrap(), 1);
        }
        if a != 1 {
            for v in places_for(&[a, 1 - a]) {
                prop_assert_eq!(hilbert_symbol(&int(a), &int(1 - a), &v).unwrap(), 1);
            }
        }
    }

    #[test]
    fn hilbert_square_class_invariance(a in nonzero(60), b in nonzero(60), c in 1i64..12, d in 1i64..12) {
        let a2 = int(a) * int(c * c);
        let b2 = int(b) * rat(d * d, 1) / int(c * c);
        for v in places_for(&[a, b, c, d]) {
            prop_assert_eq!(hilbert_symbol(&int(a), &int(b), &v).unwrap(), hilbert_symbol(&a2, &b2, &v).unwrap());
        }
    }

    #[test]
    fn hilbert_bimultiplicative(a in nonzero(40), b in nonzero(40), c in nonzero(40)) {
        for v in places_for(&[a, b, c]) {
            let lhs = hilbert_symbol(&int(a), &(int(b) * int(c)), &v).unwrap();
            let rhs = hilbert_symbol(&int(a), &int(b), &v).unwrap() * hilbert_symbol(&int(a), &int(c), &v).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn brauer_group_laws(a in nonzero(30), b in nonzero(30), c in nonzero(30), d in nonzero(30), e in nonzero(30), f in nonzero(30)) {
        let x = brauer_class_of_symbol(&int(a), &int(b)).unwrap();
        let y = brauer_class_of_symbol(&int(c), &int(d)).unwrap();
        let z = brauer_class_of_symbol(&int(e), &int(f)).unwrap();
        prop_assert_eq!(brauer_add(&x, &y), brauer_add(&y, &x));
        prop_assert_eq!(brauer_add(&brauer_add(&x, &y), &z), brauer_add(&x, &brauer_add(&y, &z)));
        prop_assert!(brauer_add(&x, &x).is_trivial());
        prop_assert!(x.satisfies_reciprocity());
        // (a, b) + (a, d) = (a, bd)
        let bc = brauer_class_of_symbol(&int(a), &(int(b) * int(d))).unwrap();
        let sum = brauer_add(&x, &brauer_class_of_symbol(&int(a), &int(d)).unwrap());
        prop_assert_eq!(bc, sum);
    }

    #[test]
    fn square_class_ignores_squares(n in nonzero(500), k in 1i64..30, m in 1i64..30) {
        prop_assert_eq!(
            square_class(&(int(n) * rat(k * k, m * m))).unwrap(),
            square_class(&int(n)).unwrap()
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn invariants_survive_congruence(seed in any::<u64>(), dim in 1usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = common::random_form(&mut rng, dim, 12);
        let p = common::disguise(&mut rng, &q);
        prop_assert_eq!(q.invariants().unwrap(), p.invariants().unwrap());
    }

    #[test]
    fn form_minus_itself_is_hyperbolic(entries in prop::collection::vec(nonzero(30), 1..5)) {
        let q = QuadraticForm::diagonal_i64(&entries).unwrap();
        let h = q.orthogonal_sum(&q.scale(&int(-1)).unwrap());
        prop_assert!(h.is_hyperbolic().unwrap());
        let wd = h.witt_decompose().unwrap();
        prop_assert_eq!(wd.witt_index, entries.len());
        prop_assert!(wd.verify(&h).is_ok());
    }

    #[test]
    fn witt_decomposition_round_trip(seed in any::<u64>(), dim in 2usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = common::random_form(&mut rng, dim, 10);
        let wd = q.witt_decompose().unwrap();
        prop_assert!(wd.verify(&q).is_ok());
        prop_assert_eq!(wd.witt_index > 0, q.decide_isotropic().unwrap());
    }

    #[test]
    fn clifford_class_matches_hasse(entries in prop::collection::vec(nonzero(25), 2..5)) {
        let q = QuadraticForm::diagonal_i64(&entries).unwrap();
        let c = clifford_algebra(&q).unwrap();
        prop_assert_eq!(c.brauer_class().unwrap(), q.invariants().unwrap().clifford.clone());
    }

    #[test]
    fn quaternion_norm_is_multiplicative(a in nonzero(12), b in nonzero(12),
        x in prop::array::uniform4(-6i64..=6), y in prop::array::uniform4(-6i64..=6)) {
        let q = QuaternionAlgebra::from_i64(a, b).unwrap();
        let x = q.element(x.map(int));
        let y = q.element(y.map(int));
        prop_assert_eq!(x.mul(&y).nrd(), x.nrd() * y.nrd());
        prop_assert_eq!(x.mul(&x.conj()).as_scalar(), Some(x.nrd()));
        prop_assert_eq!(x.mul(&y).conj(), y.conj().mul(&x.conj()));
    }

    #[test]
    fn splitting_map_is_a_homomorphism(b in nonzero(12), t in 1i64..5,
        x in prop::array::uniform4(-5i64..=5), y in prop::array::uniform4(-5i64..=5)) {
        // (t², b) is split.
        let q = QuaternionAlgebra::from_i64(t * t, b).unwrap();
        let map = q.splitting_isomorphism().unwrap();
        let x = q.element(x.map(int));
        let y = q.element(y.map(int));
        prop_assert_eq!(map.apply(&x.mul(&y)), map.apply(&x).mul(&map.apply(&y)));
        prop_assert_eq!(map.apply(&x).det(), x.nrd());
        prop_assert!(map.apply(&q.one()).sub(&pfister_core::linalg::Matrix::identity(2)).is_zero());
    }
}

#[test]
fn pfister_forms_are_multiplicative_on_a_sample() {
    // ⟨⟨a, b⟩⟩ represents the product of two represented values.
    let q = pfister_core::qform::pfister(&[int(-1), int(-1)]).unwrap();
    let x = [int(1), int(2), int(0), int(1)];
    let y = [int(3), int(-1), int(1), int(1)];
    let qx = q.eval(&x);
    let qy = q.eval(&y);
    let qa = QuaternionAlgebra::from_i64(-1, -1).unwrap();
    let prod = qa.element(x.clone()).mul(&qa.element(y.clone()));
    assert_eq!(q.eval(&prod.coords), qx * qy);
}
