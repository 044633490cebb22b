//! Zeros of ternary forms by Legendre descent.
//!
//! x² = a·y² + b·z² with |a| ≤ |b| reduces to x² = a·y² + c·z² where
//! t² − a = b·c·m², t² ≡ a mod b and |c| < |b|. A solution of the smaller
//! equation lifts through the norm identity
//! (X + Y√a)(t + √a) = (Xt + aY) + (X + tY)√a.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{diagonalize_gram, QformError};
use crate::arith::{exact_sqrt, local, square_class, Factorizer, Rational};
use crate::linalg::{Matrix, Vector};

/// Square root of `a` modulo a squarefree `n`, if one exists.
fn sqrt_mod_squarefree(a: &BigInt, n: &BigUint, f: &Factorizer) -> Result<Option<BigInt>, QformError> {
    let mut root = BigInt::zero();
    let mut modulus = BigInt::one();
    for (p, _) in f.factor(n)? {
        let pb = BigInt::from_biguint(Sign::Plus, p.clone());
        let r = a.mod_floor(&pb).to_biguint().expect("non-negative residue");
        let Some(s) = local::sqrt_mod_prime(&r, &p) else {
            return Ok(None);
        };
        // CRT: root ≡ old mod `modulus`, root ≡ s mod p.
        let s = BigInt::from_biguint(Sign::Plus, s);
        let inv = local::inverse_mod(&modulus, &p).expect("coprime moduli");
        let k = ((s - &root) * inv).mod_floor(&pb);
        root += k * &modulus;
        modulus *= pb;
    }
    Ok(Some(root))
}

/// c = c'·m² with c' squarefree.
fn squarefree_split(c: &BigInt, f: &Factorizer) -> Result<(BigInt, BigInt), QformError> {
    let mut core = BigInt::one();
    let mut m = BigInt::one();
    for (p, e) in f.factor(c.magnitude())? {
        let pb = BigInt::from_biguint(Sign::Plus, p);
        if e % 2 == 1 {
            core *= &pb;
        }
        m *= pb.pow(e / 2);
    }
    if c.is_negative() {
        core = -core;
    }
    Ok((core, m))
}

/// A nonzero (x, y, z) with x² = a·y² + b·z², for squarefree a and b.
fn descend(a: &BigInt, b: &BigInt, f: &Factorizer) -> Result<Option<[BigInt; 3]>, QformError> {
    let (one, zero) = (BigInt::one(), BigInt::zero());
    if a.is_one() {
        return Ok(Some([one.clone(), one, zero]));
    }
    if b.is_one() {
        return Ok(Some([one.clone(), zero, one]));
    }
    if *a == -b {
        return Ok(Some([zero, one.clone(), one]));
    }
    if a.abs() > b.abs() {
        return Ok(descend(b, a, f)?.map(|[x, y, z]| [x, z, y]));
    }
    if b.abs().is_one() {
        return Ok(None);
    }
    let Some(mut t) = sqrt_mod_squarefree(a, b.magnitude(), f)? else {
        return Ok(None);
    };
    let bb = b.abs();
    if BigInt::from(2) * &t > bb {
        t -= &bb;
    }
    let c = (&t * &t - a) / b;
    if c.is_zero() {
        return Ok(None);
    }
    let (core, m) = squarefree_split(&c, f)?;
    let Some([x, y, z]) = descend(a, &core, f)? else {
        return Ok(None);
    };
    Ok(Some([&x * &t + a * &y, &x + &t * &y, core * z * m]))
}

fn rational_sqrt(x: &Rational) -> Rational {
    let n = exact_sqrt(x.numer().magnitude()).expect("square numerator");
    let d = exact_sqrt(x.denom().magnitude()).expect("square denominator");
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// An isotropic vector of a nondegenerate isotropic ternary form, or None if
/// the form has no rational zero.
pub fn isotropic_ternary(g: &Matrix) -> Result<Option<Vector>, QformError> {
    let f = Factorizer::default();
    let diag = diagonalize_gram(g);
    if let Some(i) = diag.entries.iter().position(|x| x.is_zero()) {
        return Ok(Some(diag.basis.col(i)));
    }
    // dᵢ = sᵢ·rᵢ² with sᵢ squarefree.
    let s: Vec<BigInt> = diag
        .entries
        .iter()
        .map(|d| square_class(d).map(|c| c.representative().clone()))
        .collect::<Result<_, _>>()?;
    let r: Vec<Rational> = diag
        .entries
        .iter()
        .zip(&s)
        .map(|(d, si)| rational_sqrt(&(d / Rational::from_integer(si.clone()))))
        .collect();
    // s₀x₀² + s₁x₁² + s₂x₂² = 0 becomes X² = A·Y² + B·Z² with X = s₀x₀,
    // −s₀s₁ = A·g₁², −s₀s₂ = B·g₂², Y = g₁x₁, Z = g₂x₂.
    let (a, g1) = squarefree_split(&-(&s[0] * &s[1]), &f)?;
    let (b, g2) = squarefree_split(&-(&s[0] * &s[2]), &f)?;
    let Some([x, y, z]) = descend(&a, &b, &f)? else {
        return Ok(None);
    };
    let xs = [
        Rational::new(x, s[0].clone()),
        Rational::new(y, g1),
        Rational::new(z, g2),
    ];
    let coords: Vec<Rational> = xs.iter().zip(&r).map(|(x, ri)| x / ri).collect();
    Ok(Some(diag.basis.mul_vec(&coords)))
}
