//! Integer factorization for square-class reduction and local invariants.
//!
//! Trial division up to a configurable bound handles the desk-scale inputs
//! seen in practice. Whatever cofactor survives is split by perfect-power
//! detection, a Miller-Rabin test and Pollard-Brent rho with a fixed
//! iteration budget; running out of budget is reported, never guessed.

use std::sync::{Arc, OnceLock};

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::ArithError;

/// Default trial-division bound.
pub const DEFAULT_TRIAL_BOUND: u64 = 1_000_000;

const RHO_ITERATIONS: u64 = 1 << 22;
const RHO_ATTEMPTS: u64 = 12;

static DEFAULT_PRIMES: OnceLock<Arc<Vec<u64>>> = OnceLock::new();

fn sieve(bound: u64) -> Vec<u64> {
    let n = bound as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

/// Factorization engine with a trial-division bound.
#[derive(Debug, Clone)]
pub struct Factorizer {
    bound: u64,
    primes: Arc<Vec<u64>>,
}

impl Default for Factorizer {
    fn default() -> Self {
        let primes = DEFAULT_PRIMES
            .get_or_init(|| Arc::new(sieve(DEFAULT_TRIAL_BOUND)))
            .clone();
        Self {
            bound: DEFAULT_TRIAL_BOUND,
            primes,
        }
    }
}

impl Factorizer {
    pub fn with_bound(bound: u64) -> Self {
        if bound == DEFAULT_TRIAL_BOUND {
            return Self::default();
        }
        Self {
            bound,
            primes: Arc::new(sieve(bound.max(2))),
        }
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    /// Prime factorization of `n` (n ≥ 1), sorted by prime.
    pub fn factor(&self, n: &BigUint) -> Result<Vec<(BigUint, u32)>, ArithError> {
        if n.is_zero() {
            return Err(ArithError::ZeroInput);
        }
        let mut out: Vec<(BigUint, u32)> = Vec::new();
        let mut rest = n.clone();
        for &p in self.primes.iter() {
            if rest.is_one() {
                break;
            }
            let pb = BigUint::from(p);
            if &pb * &pb > rest {
                break;
            }
            if (&rest % p).is_zero() {
                let mut e = 0u32;
                while (&rest % p).is_zero() {
                    rest /= p;
                    e += 1;
                }
                out.push((pb, e));
            }
        }
        if !rest.is_one() {
            let bound_sq = BigUint::from(self.bound) * BigUint::from(self.bound);
            if rest < bound_sq || is_probable_prime(&rest) {
                out.push((rest, 1));
            } else {
                let mut big = Vec::new();
                split_large(&rest, &mut big)?;
                for (p, e) in big {
                    match out.iter_mut().find(|(q, _)| *q == p) {
                        Some(entry) => entry.1 += e,
                        None => out.push((p, e)),
                    }
                }
            }
        }
        out.sort();
        Ok(out)
    }

    /// Distinct prime divisors of `n`.
    pub fn prime_divisors(&self, n: &BigUint) -> Result<Vec<BigUint>, ArithError> {
        Ok(self.factor(n)?.into_iter().map(|(p, _)| p).collect())
    }

    /// Distinct prime divisors of `n`, dividing out the (prime) `hint` first
    /// so that only the leftover cofactor needs a full factorization.
    pub fn prime_divisors_with_hint(
        &self,
        n: &BigUint,
        hint: &[BigUint],
    ) -> Result<Vec<BigUint>, ArithError> {
        if n.is_zero() {
            return Err(ArithError::ZeroInput);
        }
        let mut rest = n.clone();
        let mut out = Vec::new();
        for p in hint {
            if p <= &BigUint::one() {
                continue;
            }
            if (&rest % p).is_zero() {
                while (&rest % p).is_zero() {
                    rest /= p;
                }
                out.push(p.clone());
            }
        }
        if !rest.is_one() {
            out.extend(self.prime_divisors(&rest)?);
        }
        out.sort();
        out.dedup();
        Ok(out)
    }
}

fn split_large(n: &BigUint, out: &mut Vec<(BigUint, u32)>) -> Result<(), ArithError> {
    if n.is_one() {
        return Ok(());
    }
    if is_probable_prime(n) {
        push_factor(out, n.clone(), 1);
        return Ok(());
    }
    let bits = n.bits() as u32;
    for k in (2..=bits).rev() {
        let r = n.nth_root(k);
        if r > BigUint::one() && r.pow(k) == *n {
            let mut inner = Vec::new();
            split_large(&r, &mut inner)?;
            for (p, e) in inner {
                push_factor(out, p, e * k);
            }
            return Ok(());
        }
    }
    let d = pollard_brent(n).ok_or_else(|| ArithError::FactorizationFailed(n.to_string()))?;
    let other = n / &d;
    split_large(&d, out)?;
    split_large(&other, out)
}

fn push_factor(out: &mut Vec<(BigUint, u32)>, p: BigUint, e: u32) {
    match out.iter_mut().find(|(q, _)| *q == p) {
        Some(entry) => entry.1 += e,
        None => out.push((p, e)),
    }
}

/// Miller-Rabin with the first 20 prime bases. Deterministic below 3.3·10²⁴.
pub fn is_probable_prime(n: &BigUint) -> bool {
    const BASES: [u64; 20] = [
        2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71,
    ];
    let two = BigUint::from(2u32);
    if *n < two {
        return false;
    }
    for &b in BASES.iter() {
        if *n == BigUint::from(b) {
            return true;
        }
        if (n % b).is_zero() {
            return false;
        }
    }
    let n_minus_1 = n - 1u32;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    'witness: for &b in BASES.iter() {
        let mut x = BigUint::from(b).modpow(&d, n);
        if x.is_one() || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn pollard_brent(n: &BigUint) -> Option<BigUint> {
    if n.is_even() {
        return Some(BigUint::from(2u32));
    }
    for attempt in 1..=RHO_ATTEMPTS {
        let c = BigUint::from(attempt);
        let f = |x: &BigUint| (x * x + &c) % n;
        let mut y = BigUint::from(2u32 + attempt as u32);
        let mut r: u64 = 1;
        let mut q = BigUint::one();
        let mut g = BigUint::one();
        let mut x = y.clone();
        let mut ys = y.clone();
        let m: u64 = 128;
        let mut steps: u64 = 0;
        while g.is_one() && steps < RHO_ITERATIONS {
            x = y.clone();
            for _ in 0..r {
                y = f(&y);
            }
            let mut k = 0;
            while k < r && g.is_one() {
                ys = y.clone();
                for _ in 0..m.min(r - k) {
                    y = f(&y);
                    let diff = if x > y { &x - &y } else { &y - &x };
                    q = (q * diff) % n;
                }
                g = q.gcd(n);
                k += m;
            }
            steps += r;
            r *= 2;
        }
        if g == *n {
            loop {
                ys = f(&ys);
                let diff = if x > ys { &x - &ys } else { &ys - &x };
                g = diff.gcd(n);
                if !g.is_one() {
                    break;
                }
            }
        }
        if !g.is_one() && g != *n {
            return Some(g);
        }
    }
    None
}

/// Integer square root test: returns `Some(r)` with r² = n.
pub fn exact_sqrt(n: &BigUint) -> Option<BigUint> {
    let r = n.sqrt();
    if &r * &r == *n {
        Some(r)
    } else {
        None
    }
}

/// Small-prime convenience used by tests and callers holding a `u64`.
pub fn factor_u64(n: u64) -> Result<Vec<(u64, u32)>, ArithError> {
    Factorizer::default()
        .factor(&BigUint::from(n))
        .map(|v| {
            v.into_iter()
                .map(|(p, e)| (p.to_u64().expect("factor of u64 fits"), e))
                .collect()
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(mut n: u64) -> Vec<(u64, u32)> {
        let mut out = Vec::new();
        let mut p = 2;
        while p * p <= n {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            if e > 0 {
                out.push((p, e));
            }
            p += 1;
        }
        if n > 1 {
            out.push((n, 1));
        }
        out
    }

    #[test]
    fn small_numbers_match_brute_force() {
        for n in 1..3000u64 {
            assert_eq!(factor_u64(n).unwrap(), brute(n), "n = {n}");
        }
    }

    #[test]
    fn large_semiprime_is_split_by_rho() {
        let p = BigUint::from(1_000_000_007u64);
        let q = BigUint::from(998_244_353u64);
        let f = Factorizer::with_bound(1000);
        let got = f.factor(&(&p * &q)).unwrap();
        assert_eq!(got, vec![(q, 1), (p, 1)]);
    }

    #[test]
    fn perfect_power_of_large_prime() {
        let p = BigUint::from(1_000_003u64);
        let n = p.pow(24u32) * BigUint::from(2u32).pow(16u32);
        let got = Factorizer::default().factor(&n).unwrap();
        assert_eq!(got, vec![(BigUint::from(2u32), 16), (p, 24)]);
    }

    #[test]
    fn zero_is_rejected() {
        assert!(Factorizer::default().factor(&BigUint::zero()).is_err());
    }

    #[test]
    fn primality() {
        assert!(is_probable_prime(&BigUint::from(861_997u64)));
        assert!(!is_probable_prime(&BigUint::from(561u64)));
        assert!(is_probable_prime(&BigUint::from(2u32)));
    }
}
