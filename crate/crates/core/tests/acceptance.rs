//! Acceptance suite: one PASS/FAIL line per criterion with its time budget.
//!
//! Run with `cargo test --release -p pfister-core --test acceptance -- --nocapture`
//! to see the report.

mod common;

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use pfister_core::arith::{
    brauer_add, brauer_class_of_symbol, candidate_places, hilbert_symbol, int, rat, Factorizer, Rational,
};
use pfister_core::csa::{clifford_algebra, split_form, E1Route, InvolutionAlgebra, InvolutionType};
use pfister_core::qform::{pfister, QuadraticForm};
use pfister_core::quat::{QuatInvolution, QuaternionAlgebra};
use pfister_core::shapiro4;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<(), String>;

fn ensure(ok: bool, what: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

fn is_square_integer(n: &BigInt) -> bool {
    !n.is_negative() && {
        let r = n.sqrt();
        &r * &r == *n
    }
}

/// Independent of the library: a rational is a square iff its reduced
/// numerator and denominator are.
fn is_rational_square(x: &Rational) -> bool {
    is_square_integer(x.numer()) && is_square_integer(x.denom())
}

fn reciprocity(rng: &mut ChaCha8Rng) -> Check {
    let f = Factorizer::default();
    for _ in 0..200 {
        let a = rat(common::nonzero(rng, 50), rng.gen_range(1..=50));
        let b = rat(common::nonzero(rng, 50), rng.gen_range(1..=50));
        let places = candidate_places(&[&a, &b], &f).map_err(|e| e.to_string())?;
        let mut prod = 1i8;
        for v in &places {
            prod *= hilbert_symbol(&a, &b, v).map_err(|e| e.to_string())?;
        }
        ensure(prod == 1, || format!("product of ({a}, {b})_v is -1"))?;
    }
    Ok(())
}

fn congruence_invariance(rng: &mut ChaCha8Rng) -> Check {
    for _ in 0..100 {
        let dim = rng.gen_range(1..=8);
        let q = common::random_form(rng, dim, 20);
        let p = common::disguise(rng, &q);
        let (a, b) = (q.invariants().map_err(|e| e.to_string())?, p.invariants().map_err(|e| e.to_string())?);
        ensure(a == b, || format!("invariants of {:?} changed under congruence", q.gram()))?;
    }
    Ok(())
}

fn witt_round_trip(rng: &mut ChaCha8Rng) -> Check {
    for _ in 0..50 {
        let k = rng.gen_range(0..=3);
        let aniso = rng.gen_range(1..=8 - 2 * k).min(4);
        let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
        let mut q = QuadraticForm::diagonal_i64(
            &(0..aniso).map(|_| sign * rng.gen_range(1..=20)).collect::<Vec<_>>(),
        )
        .unwrap();
        if k > 0 {
            q = QuadraticForm::hyperbolic(k).unwrap().orthogonal_sum(&q);
        }
        let q = common::disguise(rng, &q);
        let wd = q.witt_decompose().map_err(|e| format!("{:?}: {e}", q.gram()))?;
        wd.verify(&q)?;
        ensure(wd.witt_index == k, || format!("index {} instead of {k}", wd.witt_index))?;
        let residue = q.restrict(&wd.anisotropic_basis).map_err(|e| e.to_string())?;
        ensure(residue.is_definite(), || "residue is not definite".into())?;
    }
    Ok(())
}

fn disguised_diag(rng: &mut ChaCha8Rng, entries: &[i64]) -> QuadraticForm {
    common::disguise(rng, &common::diag(entries))
}

fn similarity_criteria(rng: &mut ChaCha8Rng) -> Check {
    let symbols = [-7i64, -5, -3, -2, -1, 2, 3, 5, 6, 7, 10, 11];
    // dim 4: similar to a 2-fold Pfister form iff the determinant is a square.
    let mut seen = (0, 0);
    while seen != (50, 50) {
        let mut e: Vec<i64> = (0..3).map(|_| common::nonzero(rng, 15)).collect();
        let want_square = seen.0 < 50;
        let last = if want_square {
            e.iter().product::<i64>() * rng.gen_range(1..=3i64).pow(2)
        } else {
            common::nonzero(rng, 15)
        };
        e.push(last);
        let q = disguised_diag(rng, &e);
        let square = is_rational_square(q.det());
        if square != want_square {
            continue;
        }
        let ans = q.in_gp_r(2).map_err(|e| e.to_string())?;
        ensure(ans == square, || format!("in_gp_r(<{e:?}>, 2) = {ans}"))?;
        if square {
            seen.0 += 1;
        } else {
            seen.1 += 1;
        }
    }
    // dim 8: λ⟨⟨a, b, c⟩⟩ is similar to a 3-fold Pfister form; μ⟨⟨a, b⟩⟩ ⊥ −⟨⟨c, d⟩⟩
    // has trivial determinant and Clifford class (a, b) + (c, d).
    for _ in 0..50 {
        let s: Vec<Rational> = (0..3).map(|_| int(*symbols.choose(rng).unwrap())).collect();
        let lambda = int(common::nonzero(rng, 6));
        let q = pfister(&s).unwrap().scale(&lambda).unwrap();
        let p = common::disguise(rng, &q);
        ensure(p.in_gp_r(3).map_err(|e| e.to_string())?, || format!("λ<<{s:?}>> rejected"))?;
    }
    let mut negatives = 0;
    while negatives < 50 {
        let s: Vec<Rational> = (0..4).map(|_| int(*symbols.choose(rng).unwrap())).collect();
        let c1 = brauer_class_of_symbol(&s[0], &s[1]).unwrap();
        let c2 = brauer_class_of_symbol(&s[2], &s[3]).unwrap();
        if brauer_add(&c1, &c2).is_trivial() {
            continue;
        }
        let mu = int(common::nonzero(rng, 6));
        let q = pfister(&s[..2])
            .unwrap()
            .scale(&mu)
            .unwrap()
            .orthogonal_sum(&pfister(&s[2..]).unwrap().scale(&int(-1)).unwrap());
        ensure(is_rational_square(q.det()), || "determinant should be a square".into())?;
        let p = common::disguise(rng, &q);
        ensure(!p.in_gp_r(3).map_err(|e| e.to_string())?, || format!("form from {s:?} accepted"))?;
        negatives += 1;
    }
    Ok(())
}

const SYMBOLS: [i64; 10] = [-1, 2, -2, 3, -3, 5, -5, 6, 7, -7];

/// (Q₁, γ₁) ⊗ (Q₂, γ₂) with [Q₁] = [Q₂], both involutions of the same type.
fn split_product(rng: &mut ChaCha8Rng, canonical: bool) -> InvolutionAlgebra {
    loop {
        let (a, b) = (*SYMBOLS.choose(rng).unwrap(), *SYMBOLS.choose(rng).unwrap());
        let q1 = QuaternionAlgebra::from_i64(a, b).unwrap();
        // (a, b) ≅ (a, −ab) ≅ (b, a) ≅ (at², b); pick one at random.
        let t = rng.gen_range(1..=3i64);
        let (c, d) = match rng.gen_range(0..4) {
            0 => (a, -a * b),
            1 => (b, a),
            2 => (a * t * t, b),
            _ => (a, b),
        };
        let q2 = QuaternionAlgebra::from_i64(c, d).unwrap();
        if q1.brauer_class().unwrap() != q2.brauer_class().unwrap() {
            continue;
        }
        let inv = |rng: &mut ChaCha8Rng, q: &QuaternionAlgebra| {
            if canonical {
                return QuatInvolution::Canonical;
            }
            loop {
                let s = q.element([int(0), int(rng.gen_range(-2..=2)), int(rng.gen_range(-2..=2)), int(rng.gen_range(-2..=2))]);
                if let Ok(i) = QuatInvolution::orthogonal(&s) {
                    if !s.nrd().is_zero() {
                        return i;
                    }
                }
            }
        };
        let i1 = inv(rng, &q1);
        let i2 = inv(rng, &q2);
        let a1 = InvolutionAlgebra::from_quaternion(&q1, &i1).unwrap();
        let a2 = InvolutionAlgebra::from_quaternion(&q2, &i2).unwrap();
        return a1.tensor(&a2).unwrap();
    }
}

fn structural_vs_adjoint(rng: &mut ChaCha8Rng) -> Check {
    for n in 0..20 {
        let a = split_product(rng, n % 2 == 0);
        ensure(a.kind() == InvolutionType::Orthogonal, || "product is not orthogonal".into())?;
        let q = split_form(&a)
            .map_err(|e| e.to_string())?
            .ok_or_else(|| "split product has no adjoint form".to_string())?;
        let e0 = a.e0().map_err(|e| e.to_string())?;
        ensure(e0 as usize == q.dim() % 2, || "e0 differs from dim q mod 2".into())?;
        let e1 = a.e1_routes().map_err(|e| e.to_string())?;
        ensure(e1.len() >= 2, || format!("only {} e1 routes", e1.len()))?;
        let disc = q.invariants().map_err(|e| e.to_string())?.disc.clone();
        for (route, class) in &e1 {
            ensure(*class == disc, || format!("e1 via {route} is {class}, adjoint gives {disc}"))?;
        }
        if disc.is_trivial() {
            let e2 = a.e2_routes().map_err(|e| e.to_string())?;
            ensure(e2.len() >= 2, || format!("only {} e2 routes", e2.len()))?;
            let beta = q.invariants().map_err(|e| e.to_string())?.clifford.clone();
            for (route, pair) in &e2 {
                ensure(pair.contains(&beta), || format!("e2 via {route} misses the adjoint Clifford class"))?;
            }
        }
    }
    Ok(())
}

fn clifford_vs_hasse(rng: &mut ChaCha8Rng) -> Check {
    for _ in 0..30 {
        let dim = rng.gen_range(2..=4);
        let q = common::random_form(rng, dim, 12);
        let c = clifford_algebra(&q).map_err(|e| e.to_string())?;
        let structural = c.brauer_class().map_err(|e| e.to_string())?;
        let hasse = q.invariants().map_err(|e| e.to_string())?.clifford.clone();
        ensure(structural == hasse, || format!("Clifford class mismatch for {:?}", q.gram()))?;
    }
    Ok(())
}

fn shapiro_batch() -> Check {
    let batch = shapiro4::run_batch(25, 7);
    for r in &batch.scenarios {
        ensure(r.verdict.pass, || format!("seed {}: {:?}", r.scenario.seed, r.verdict.failures))?;
        ensure(r.invariant_check.as_ref().is_some_and(|c| c.in_i3), || {
            format!("seed {}: q_u not in I^3", r.scenario.seed)
        })?;
        match r.branch {
            None => return Err(format!("seed {}: no branch", r.scenario.seed)),
            Some(shapiro4::Branch::Hyperbolic) => {
                ensure(r.claims.iter().all(|c| c.passed), || "claim failed".into())?;
                ensure(r.isotropic_subspace.len() >= 5, || "isotropic subspace too small".into())?;
                ensure(r.witt.as_ref().is_some_and(|w| w.witt_index == 8), || "witt index is not 8".into())?;
            }
            Some(shapiro4::Branch::Definite) => {
                ensure(r.similar_to_4_fold_pfister == Some(true), || "definite q_u not in GP_4".into())?;
            }
        }
    }
    ensure(batch.scenarios.len() == 25, || "batch size".into())
}

fn canonical_pairs_have_trivial_e1(rng: &mut ChaCha8Rng) -> Check {
    for _ in 0..20 {
        let a = split_product(rng, true);
        let routes = a.e1_routes().map_err(|e| e.to_string())?;
        let adjoint = routes
            .iter()
            .find(|(r, _)| *r == E1Route::Adjoint)
            .ok_or_else(|| "no adjoint route".to_string())?;
        ensure(adjoint.1.is_trivial(), || format!("adjoint e1 is {}", adjoint.1))?;
    }
    Ok(())
}

fn determinism() -> Check {
    let a = serde_json::to_string_pretty(&shapiro4::run_batch(3, 11)).unwrap();
    let b = serde_json::to_string_pretty(&shapiro4::run_batch(3, 11)).unwrap();
    ensure(a == b, || "batch reports differ".into())?;
    let mut r1 = ChaCha8Rng::seed_from_u64(99);
    let mut r2 = ChaCha8Rng::seed_from_u64(99);
    let q1 = common::random_form(&mut r1, 6, 10);
    let q2 = common::random_form(&mut r2, 6, 10);
    let w1 = serde_json::to_string(&q1.witt_decompose().map_err(|e| e.to_string())?).unwrap();
    let w2 = serde_json::to_string(&q2.witt_decompose().map_err(|e| e.to_string())?).unwrap();
    ensure(w1 == w2, || "Witt decompositions differ".into())
}

#[test]
fn acceptance() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let criteria: Vec<(&str, u64, Box<dyn FnOnce(&mut ChaCha8Rng) -> Check>)> = vec![
        ("Hilbert reciprocity", 1, Box::new(reciprocity)),
        ("invariants under congruence", 5, Box::new(congruence_invariance)),
        ("Witt round trip", 30, Box::new(witt_round_trip)),
        ("GP_2 and GP_3 criteria", 10, Box::new(similarity_criteria)),
        ("structural and adjoint e0/e1/e2", 30, Box::new(structural_vs_adjoint)),
        ("Clifford class vs Hasse formula", 10, Box::new(clifford_vs_hasse)),
        ("shapiro4 run --count 25 --seed 7", 120, Box::new(|_| shapiro_batch())),
        ("split canonical pairs have trivial e1", 20, Box::new(canonical_pairs_have_trivial_e1)),
        ("deterministic reports", 60, Box::new(|_| determinism())),
    ];
    let mut failed = Vec::new();
    for (i, (name, limit, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = run(&mut rng);
        let elapsed = start.elapsed();
        let on_time = elapsed < Duration::from_secs(limit);
        let pass = result.is_ok() && on_time;
        println!(
            "criterion {}: {} {name} ({:.2}s, limit {limit}s){}",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            match &result {
                Err(e) => format!(": {e}"),
                Ok(()) if !on_time => ": over time".into(),
                Ok(()) => String::new(),
            }
        );
        if !pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
