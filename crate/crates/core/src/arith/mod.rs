//! Exact rational arithmetic, square classes, places of ℚ and Hilbert symbols.

mod factor;
pub mod local;
pub mod serde_rational;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub use factor::{exact_sqrt, factor_u64, is_probable_prime, Factorizer, DEFAULT_TRIAL_BOUND};

/// Exact rational number, always in lowest terms with a positive denominator.
pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("zero input where a nonzero rational is required")]
    ZeroInput,
    #[error("cannot parse rational from {0:?}")]
    Parse(String),
    #[error("factorization did not finish for {0}")]
    FactorizationFailed(String),
    #[error("invalid place {0:?}")]
    InvalidPlace(String),
}

/// Shorthand for the rational n/d.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Shorthand for an integer as a rational.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses "num/den" or "num".
pub fn parse_rational(s: &str) -> Result<Rational, ArithError> {
    let s = s.trim();
    let err = || ArithError::Parse(s.to_string());
    match s.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).map_err(|_| err())?;
            let d = BigInt::from_str(d.trim()).map_err(|_| err())?;
            if d.is_zero() {
                return Err(err());
            }
            Ok(Rational::new(n, d))
        }
        None => Ok(Rational::from_integer(
            BigInt::from_str(s).map_err(|_| err())?,
        )),
    }
}

/// Formats as "num/den", omitting the denominator when it is 1.
pub fn format_rational(x: &Rational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// A class in ℚ*/ℚ*², represented by its squarefree integer.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SquareClass(BigInt);

impl SquareClass {
    pub fn one() -> Self {
        SquareClass(BigInt::one())
    }

    /// Wraps an integer already known to be squarefree.
    pub fn from_squarefree(n: BigInt) -> Self {
        SquareClass(n)
    }

    pub fn representative(&self) -> &BigInt {
        &self.0
    }

    pub fn is_trivial(&self) -> bool {
        self.0.is_one()
    }

    pub fn to_rational(&self) -> Rational {
        Rational::from_integer(self.0.clone())
    }

    /// Product of classes; squarefree representatives multiply after
    /// removing their common part.
    pub fn mul(&self, other: &SquareClass) -> SquareClass {
        let g = self.0.abs().gcd(&other.0.abs());
        SquareClass((&self.0 / &g) * (&other.0 / &g))
    }

    pub fn negate(&self) -> SquareClass {
        SquareClass(-self.0.clone())
    }
}

impl fmt::Display for SquareClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for SquareClass {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

impl<'de> Deserialize<'de> for SquareClass {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        let n = BigInt::from_str(&s).map_err(serde::de::Error::custom)?;
        Ok(SquareClass(n))
    }
}

/// Squarefree integer representing `x` modulo squares.
pub fn square_class(x: &Rational) -> Result<SquareClass, ArithError> {
    square_class_with(x, &Factorizer::default())
}

pub fn square_class_with(x: &Rational, f: &Factorizer) -> Result<SquareClass, ArithError> {
    if x.is_zero() {
        return Err(ArithError::ZeroInput);
    }
    let n = x.numer().magnitude() * x.denom().magnitude();
    let mut rep = BigUint::one();
    if exact_sqrt(&n).is_none() {
        for (p, e) in f.factor(&n)? {
            if e % 2 == 1 {
                rep *= p;
            }
        }
    }
    let sign = if x.is_negative() { Sign::Minus } else { Sign::Plus };
    Ok(SquareClass(BigInt::from_biguint(sign, rep)))
}

/// A place of ℚ: the real place or a finite prime.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Place {
    Real,
    Finite(BigUint),
}

impl Place {
    pub fn finite(p: u64) -> Place {
        Place::Finite(BigUint::from(p))
    }

    pub fn two() -> Place {
        Place::finite(2)
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Real => write!(f, "real"),
            Place::Finite(p) => write!(f, "p{p}"),
        }
    }
}

impl FromStr for Place {
    type Err = ArithError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "real" {
            return Ok(Place::Real);
        }
        let p = s
            .strip_prefix('p')
            .and_then(|d| BigUint::from_str(d).ok())
            .ok_or_else(|| ArithError::InvalidPlace(s.to_string()))?;
        if !is_probable_prime(&p) {
            return Err(ArithError::InvalidPlace(s.to_string()));
        }
        Ok(Place::Finite(p))
    }
}

impl Serialize for Place {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Place {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Local Hilbert symbol (a, b)_v ∈ {+1, −1}.
pub fn hilbert_symbol(a: &Rational, b: &Rational, v: &Place) -> Result<i8, ArithError> {
    if a.is_zero() || b.is_zero() {
        return Err(ArithError::ZeroInput);
    }
    Ok(match v {
        Place::Real => {
            if a.is_negative() && b.is_negative() {
                -1
            } else {
                1
            }
        }
        Place::Finite(p) => finite_hilbert(a, b, p),
    })
}

fn finite_hilbert(a: &Rational, b: &Rational, p: &BigUint) -> i8 {
    let (alpha, u) = local::rational_valuation(a, p);
    let (beta, v) = local::rational_valuation(b, p);
    if *p == BigUint::from(2u32) {
        let eight = BigInt::from(8);
        let u8 = u.mod_floor(&eight).to_i64().unwrap();
        let v8 = v.mod_floor(&eight).to_i64().unwrap();
        let eps = |x: i64| ((x - 1) / 2) % 2;
        let omega = |x: i64| ((x * x - 1) / 8) % 2;
        let e = eps(u8) * eps(v8) + alpha.rem_euclid(2) * omega(v8) + beta.rem_euclid(2) * omega(u8);
        if e % 2 == 0 {
            1
        } else {
            -1
        }
    } else {
        let mut s = 1i8;
        let eps_p = ((p - 1u32) / 2u32 % 2u32).is_one();
        if alpha.rem_euclid(2) == 1 && beta.rem_euclid(2) == 1 && eps_p {
            s = -s;
        }
        if beta.rem_euclid(2) == 1 {
            s *= local::jacobi(&u, p);
        }
        if alpha.rem_euclid(2) == 1 {
            s *= local::jacobi(&v, p);
        }
        s
    }
}

/// A class in Br₂(ℚ), stored as the set of places where it is ramified.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BrauerClass {
    ramified: BTreeSet<Place>,
}

impl BrauerClass {
    pub fn trivial() -> Self {
        Self::default()
    }

    /// Builds a class from its ramified places. Fails if reciprocity is violated.
    pub fn from_places<I: IntoIterator<Item = Place>>(places: I) -> Result<Self, ArithError> {
        let mut ramified = BTreeSet::new();
        for p in places {
            if !ramified.insert(p.clone()) {
                ramified.remove(&p);
            }
        }
        let c = BrauerClass { ramified };
        if !c.satisfies_reciprocity() {
            return Err(ArithError::InvalidPlace(format!(
                "odd number of ramified places: {c}"
            )));
        }
        Ok(c)
    }

    pub fn local_sign(&self, v: &Place) -> i8 {
        if self.ramified.contains(v) {
            -1
        } else {
            1
        }
    }

    pub fn ramified_places(&self) -> impl Iterator<Item = &Place> {
        self.ramified.iter()
    }

    pub fn is_trivial(&self) -> bool {
        self.ramified.is_empty()
    }

    pub fn satisfies_reciprocity(&self) -> bool {
        self.ramified.len() % 2 == 0
    }

    pub fn add(&self, other: &BrauerClass) -> BrauerClass {
        BrauerClass {
            ramified: self
                .ramified
                .symmetric_difference(&other.ramified)
                .cloned()
                .collect(),
        }
    }

    pub fn labels(&self) -> Vec<String> {
        self.ramified.iter().map(|p| p.to_string()).collect()
    }
}

impl fmt::Display for BrauerClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ramified.is_empty() {
            return write!(f, "0");
        }
        write!(f, "[{}]", self.labels().join(","))
    }
}

impl Serialize for BrauerClass {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.labels().serialize(s)
    }
}

impl<'de> Deserialize<'de> for BrauerClass {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let labels = Vec::<String>::deserialize(d)?;
        let places = labels
            .iter()
            .map(|l| l.parse::<Place>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(serde::de::Error::custom)?;
        BrauerClass::from_places(places).map_err(serde::de::Error::custom)
    }
}

/// The places at which a symbol in the given rationals can ramify:
/// the real place, 2, and the primes dividing any numerator or denominator.
pub fn candidate_places(values: &[&Rational], f: &Factorizer) -> Result<Vec<Place>, ArithError> {
    let mut primes: BTreeSet<BigUint> = BTreeSet::new();
    primes.insert(BigUint::from(2u32));
    for x in values {
        if x.is_zero() {
            return Err(ArithError::ZeroInput);
        }
        for n in [x.numer().magnitude(), x.denom().magnitude()] {
            if !n.is_one() {
                primes.extend(f.prime_divisors(n)?);
            }
        }
    }
    let mut out = vec![Place::Real];
    out.extend(primes.into_iter().map(Place::Finite));
    Ok(out)
}

/// Brauer class of the quaternion algebra (a, b).
pub fn brauer_class_of_symbol(a: &Rational, b: &Rational) -> Result<BrauerClass, ArithError> {
    brauer_class_of_symbol_with(a, b, &Factorizer::default())
}

pub fn brauer_class_of_symbol_with(
    a: &Rational,
    b: &Rational,
    f: &Factorizer,
) -> Result<BrauerClass, ArithError> {
    let mut ramified = BTreeSet::new();
    for v in candidate_places(&[a, b], f)? {
        if hilbert_symbol(a, b, &v)? == -1 {
            ramified.insert(v);
        }
    }
    Ok(BrauerClass { ramified })
}

pub fn brauer_add(x: &BrauerClass, y: &BrauerClass) -> BrauerClass {
    x.add(y)
}
