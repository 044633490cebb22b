//! Residue symbols and local square tests at a single prime.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::Rational;

/// Jacobi symbol (a/n) for odd positive n.
pub fn jacobi(a: &BigInt, n: &BigUint) -> i8 {
    assert!(n.is_odd(), "jacobi symbol needs an odd modulus");
    let n_int = BigInt::from_biguint(Sign::Plus, n.clone());
    let mut a = a.mod_floor(&n_int).to_biguint().expect("non-negative");
    let mut n = n.clone();
    let mut result = 1i8;
    while !a.is_zero() {
        let tz = a.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            a >>= tz;
            let n8 = (&n % 8u32).to_u32().unwrap();
            if tz % 2 == 1 && (n8 == 3 || n8 == 5) {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if (&a % 4u32).to_u32().unwrap() == 3 && (&n % 4u32).to_u32().unwrap() == 3 {
            result = -result;
        }
        a %= &n;
    }
    if n.is_one() {
        result
    } else {
        0
    }
}

/// Splits a nonzero integer as p^v · u with p ∤ u.
pub fn split_valuation(x: &BigInt, p: &BigUint) -> (i64, BigInt) {
    assert!(!x.is_zero());
    let p = BigInt::from_biguint(Sign::Plus, p.clone());
    let mut v = 0i64;
    let mut u = x.clone();
    loop {
        let (q, r) = u.div_rem(&p);
        if !r.is_zero() {
            break;
        }
        u = q;
        v += 1;
    }
    (v, u)
}

/// p-adic valuation and unit part of a nonzero rational, the unit part
/// represented by the integer num·den (same square class as num/den).
pub fn rational_valuation(x: &Rational, p: &BigUint) -> (i64, BigInt) {
    let (vn, un) = split_valuation(x.numer(), p);
    let (vd, ud) = split_valuation(x.denom(), p);
    (vn - vd, un * ud)
}

/// Whether the nonzero rational `x` is a square in ℚ_p.
pub fn is_local_square(x: &Rational, p: &BigUint) -> bool {
    let (v, u) = rational_valuation(x, p);
    if v % 2 != 0 {
        return false;
    }
    if *p == BigUint::from(2u32) {
        u.mod_floor(&BigInt::from(8)) == BigInt::one()
    } else {
        jacobi(&u, p) == 1
    }
}

/// Whether the nonzero rational is a square in ℝ.
pub fn is_real_square(x: &Rational) -> bool {
    x.is_positive()
}

/// Square root of `a` modulo an odd prime `p` (Tonelli-Shanks), if it exists.
pub fn sqrt_mod_prime(a: &BigUint, p: &BigUint) -> Option<BigUint> {
    let a = a % p;
    if a.is_zero() {
        return Some(BigUint::zero());
    }
    if *p == BigUint::from(2u32) {
        return Some(a);
    }
    let p_minus_1 = p - 1u32;
    let legendre = a.modpow(&(&p_minus_1 >> 1), p);
    if legendre != BigUint::one() {
        return None;
    }
    let s = p_minus_1.trailing_zeros().unwrap_or(0);
    let q = &p_minus_1 >> s;
    let mut z = BigUint::from(2u32);
    while z.modpow(&(&p_minus_1 >> 1), p) != p_minus_1 {
        z += 1u32;
    }
    let mut m = s;
    let mut c = z.modpow(&q, p);
    let mut t = a.modpow(&q, p);
    let mut r = a.modpow(&((&q + 1u32) >> 1), p);
    while !t.is_one() {
        let mut i = 0u64;
        let mut t2 = t.clone();
        while !t2.is_one() {
            t2 = (&t2 * &t2) % p;
            i += 1;
        }
        let mut b = c.clone();
        for _ in 0..(m - i - 1) {
            b = (&b * &b) % p;
        }
        m = i;
        c = (&b * &b) % p;
        t = (t * &c) % p;
        r = (r * &b) % p;
    }
    Some(r)
}

/// Modular inverse of `a` modulo `m` when gcd(a, m) = 1.
pub fn inverse_mod(a: &BigInt, m: &BigUint) -> Option<BigInt> {
    let m = BigInt::from_biguint(Sign::Plus, m.clone());
    let e = a.mod_floor(&m).extended_gcd(&m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(&m))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn legendre_brute(a: i64, p: u64) -> i8 {
        let a = a.rem_euclid(p as i64) as u64;
        if a == 0 {
            return 0;
        }
        if (1..p).any(|x| x * x % p == a) {
            1
        } else {
            -1
        }
    }

    #[test]
    fn jacobi_matches_euler_criterion_for_small_primes() {
        for p in [3u64, 5, 7, 11, 13, 17, 19, 23, 29, 31] {
            for a in -40i64..40 {
                assert_eq!(
                    jacobi(&BigInt::from(a), &BigUint::from(p)),
                    legendre_brute(a, p),
                    "a={a} p={p}"
                );
            }
        }
    }

    #[test]
    fn tonelli_shanks_roots() {
        for p in [3u64, 5, 13, 17, 41, 97, 257, 65537] {
            let pb = BigUint::from(p);
            for a in 0..60u64 {
                if let Some(r) = sqrt_mod_prime(&BigUint::from(a), &pb) {
                    assert_eq!((&r * &r) % &pb, BigUint::from(a % p));
                } else {
                    assert_eq!(legendre_brute(a as i64, p), -1);
                }
            }
        }
    }

    #[test]
    fn local_squares() {
        let two = BigUint::from(2u32);
        assert!(is_local_square(&Rational::from_integer(17.into()), &two));
        assert!(!is_local_square(&Rational::from_integer(3.into()), &two));
        assert!(is_local_square(&Rational::new(1.into(), 4.into()), &two));
        let five = BigUint::from(5u32);
        assert!(is_local_square(&Rational::from_integer((-1).into()), &five));
        assert!(!is_local_square(&Rational::from_integer(2.into()), &five));
    }
}
