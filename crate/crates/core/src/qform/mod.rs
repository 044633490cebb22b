//! Non-degenerate quadratic forms over ℚ and their classical invariants.
//!
//! Forms are stored by their Gram matrix G, with q(x) = xᵀGx and polar
//! form b(x, y) = xᵀGy. Over ℚ the tuple (dim, discriminant, Hasse class,
//! signature) is a complete isometry invariant, which is what the
//! membership tests for Iⁿ and GP_r rely on.

pub mod lattice;
mod legendre;
mod witt;

use std::collections::BTreeSet;
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::arith::{
    self, exact_sqrt, format_rational, hilbert_symbol, local, parse_rational, square_class_with,
    ArithError, BrauerClass, Factorizer, Place, Rational, SquareClass,
};
use crate::linalg::{self, Matrix, Vector};

pub use witt::{HyperbolicPair, WittDecomposition};

/// Default number of candidates examined by a witness search.
pub const DEFAULT_SEARCH_CEILING: u64 = 1_000_000;

/// Search ceiling, overridable through `PFISTER_SEARCH_CEILING`.
pub fn search_ceiling() -> u64 {
    std::env::var("PFISTER_SEARCH_CEILING")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .filter(|&c| c > 0)
        .unwrap_or(DEFAULT_SEARCH_CEILING)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QformError {
    #[error("Gram matrix is not square and symmetric")]
    NotSymmetric,
    #[error("degenerate form (determinant 0)")]
    Degenerate,
    #[error("empty form")]
    Empty,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("isotropic vector search gave up after {0} candidates")]
    SearchCeiling(u64),
    #[error("{0}")]
    Unsupported(String),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// Diagonal entries with a change of basis P such that Pᵀ·G·P = diag(entries).
#[derive(Debug, Clone)]
pub struct Diagonalization {
    pub entries: Vec<Rational>,
    pub basis: Matrix,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormInvariants {
    pub dim: usize,
    pub det_class: SquareClass,
    pub disc: SquareClass,
    pub hasse: BrauerClass,
    pub clifford: BrauerClass,
    pub signature: i64,
}

/// Outcome of an isotropy query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Isotropy {
    Anisotropic,
    Isotropic(Vector),
}

impl Isotropy {
    pub fn is_isotropic(&self) -> bool {
        matches!(self, Isotropy::Isotropic(_))
    }
}

pub struct QuadraticForm {
    gram: Matrix,
    det: Rational,
    prime_hint: Vec<BigUint>,
    diag: OnceLock<Diagonalization>,
    places: OnceLock<Result<Vec<Place>, ArithError>>,
    invariants: OnceLock<Result<FormInvariants, ArithError>>,
}

impl Clone for QuadraticForm {
    fn clone(&self) -> Self {
        QuadraticForm {
            gram: self.gram.clone(),
            det: self.det.clone(),
            prime_hint: self.prime_hint.clone(),
            diag: self.diag.clone(),
            places: self.places.clone(),
            invariants: self.invariants.clone(),
        }
    }
}

impl std::fmt::Debug for QuadraticForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("QuadraticForm").field("gram", &self.gram).finish()
    }
}

impl PartialEq for QuadraticForm {
    fn eq(&self, other: &Self) -> bool {
        self.gram == other.gram
    }
}

impl Eq for QuadraticForm {}

impl QuadraticForm {
    /// Builds a form from a symmetric, non-degenerate Gram matrix.
    pub fn new(gram: Matrix) -> Result<Self, QformError> {
        Self::with_prime_hint(gram, Vec::new())
    }

    /// Like [`QuadraticForm::new`], with primes known to divide the determinant
    /// so that local invariants avoid refactoring them.
    pub fn with_prime_hint(gram: Matrix, prime_hint: Vec<BigUint>) -> Result<Self, QformError> {
        if !gram.is_symmetric() {
            return Err(QformError::NotSymmetric);
        }
        if gram.rows() == 0 {
            return Err(QformError::Empty);
        }
        let det = gram.det();
        if det.is_zero() {
            return Err(QformError::Degenerate);
        }
        Ok(QuadraticForm {
            gram,
            det,
            prime_hint,
            diag: OnceLock::new(),
            places: OnceLock::new(),
            invariants: OnceLock::new(),
        })
    }

    pub fn diagonal(entries: &[Rational]) -> Result<Self, QformError> {
        Self::new(Matrix::diagonal(entries))
    }

    pub fn diagonal_i64(entries: &[i64]) -> Result<Self, QformError> {
        Self::diagonal(&entries.iter().map(|&a| arith::int(a)).collect::<Vec<_>>())
    }

    /// The hyperbolic plane with Gram [[0,1],[1,0]].
    pub fn hyperbolic_plane() -> Self {
        Self::new(Matrix::from_i64(&[&[0, 1], &[1, 0]])).expect("non-degenerate")
    }

    /// m copies of the hyperbolic plane, diagonalized as ⟨1,−1,…⟩.
    pub fn hyperbolic(m: usize) -> Result<Self, QformError> {
        let entries: Vec<i64> = (0..2 * m).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
        Self::diagonal_i64(&entries)
    }

    pub fn dim(&self) -> usize {
        self.gram.rows()
    }

    pub fn gram(&self) -> &Matrix {
        &self.gram
    }

    pub fn det(&self) -> &Rational {
        &self.det
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| i == j || self.gram[(i, j)].is_zero()))
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        linalg::bilinear(&self.gram, x, x)
    }

    pub fn polar(&self, x: &[Rational], y: &[Rational]) -> Rational {
        linalg::bilinear(&self.gram, x, y)
    }

    pub fn scale(&self, lambda: &Rational) -> Result<Self, QformError> {
        if lambda.is_zero() {
            return Err(QformError::Degenerate);
        }
        Self::new(self.gram.scale(lambda))
    }

    /// The form in the basis given by the columns of `p` (Pᵀ·G·P).
    pub fn transform(&self, p: &Matrix) -> Result<Self, QformError> {
        if p.rows() != self.dim() {
            return Err(QformError::DimensionMismatch(p.rows(), self.dim()));
        }
        Self::new(self.gram.congruence(p))
    }

    pub fn orthogonal_sum(&self, other: &Self) -> Self {
        let (n, m) = (self.dim(), other.dim());
        let mut g = Matrix::zeros(n + m, n + m);
        for i in 0..n {
            for j in 0..n {
                g[(i, j)] = self.gram[(i, j)].clone();
            }
        }
        for i in 0..m {
            for j in 0..m {
                g[(n + i, n + j)] = other.gram[(i, j)].clone();
            }
        }
        Self::new(g).expect("sum of non-degenerate forms")
    }

    /// Tensor product, Gram matrix as a Kronecker product.
    pub fn tensor(&self, other: &Self) -> Self {
        Self::new(self.gram.kronecker(&other.gram)).expect("tensor of non-degenerate forms")
    }

    /// Restriction to the span of the given vectors (which must stay non-degenerate).
    pub fn restrict(&self, vectors: &[Vector]) -> Result<Self, QformError> {
        let p = Matrix::from_cols(vectors);
        self.transform(&p)
    }

    /// Congruence diagonalization by symmetric Gaussian elimination.
    pub fn diagonalize(&self) -> &Diagonalization {
        self.diag.get_or_init(|| diagonalize_gram(&self.gram))
    }

    pub fn diagonal_entries(&self) -> &[Rational] {
        &self.diagonalize().entries
    }

    pub fn signature(&self) -> i64 {
        self.diagonal_entries()
            .iter()
            .map(|a| if a.is_positive() { 1 } else { -1 })
            .sum()
    }

    pub fn is_definite(&self) -> bool {
        self.signature().unsigned_abs() as usize == self.dim()
    }

    /// Places where a local invariant can be nontrivial: the real place, 2,
    /// the primes of the determinant and of the Gram denominators. At any other
    /// prime the form is unimodular over ℤ_p and all local symbols are trivial.
    pub fn relevant_places(&self) -> Result<&[Place], ArithError> {
        self.places
            .get_or_init(|| {
                let f = Factorizer::default();
                let mut primes: BTreeSet<BigUint> = BTreeSet::new();
                primes.insert(BigUint::from(2u32));
                let denoms = linalg::common_denominator(
                    &(0..self.dim())
                        .flat_map(|i| self.gram.row(i).to_vec())
                        .collect::<Vec<_>>(),
                );
                for n in [
                    self.det.numer().magnitude().clone(),
                    self.det.denom().magnitude().clone(),
                    denoms.magnitude().clone(),
                ] {
                    if !n.is_one() {
                        primes.extend(f.prime_divisors_with_hint(&n, &self.prime_hint)?);
                    }
                }
                let mut out = vec![Place::Real];
                out.extend(primes.into_iter().map(Place::Finite));
                Ok(out)
            })
            .as_deref()
            .map_err(Clone::clone)
    }

    pub fn finite_primes(&self) -> Result<Vec<BigUint>, ArithError> {
        Ok(self
            .relevant_places()?
            .iter()
            .filter_map(|p| match p {
                Place::Finite(p) => Some(p.clone()),
                Place::Real => None,
            })
            .collect())
    }

    /// Local Hasse symbol c_v(q) = ∏_{i<j} (a_i, a_j)_v.
    pub fn hasse_at(&self, v: &Place) -> i8 {
        let a = self.diagonal_entries();
        let mut s = 1i8;
        // Running product of the earlier entries keeps this linear in n.
        let mut prefix = Rational::one();
        for (j, aj) in a.iter().enumerate() {
            if j > 0 {
                s *= hilbert_symbol(&prefix, aj, v).expect("nonzero entries");
            }
            prefix *= aj;
        }
        s
    }

    pub fn invariants(&self) -> Result<&FormInvariants, ArithError> {
        self.invariants
            .get_or_init(|| self.compute_invariants())
            .as_ref()
            .map_err(Clone::clone)
    }

    fn compute_invariants(&self) -> Result<FormInvariants, ArithError> {
        let n = self.dim();
        let places = self.relevant_places()?.to_vec();
        let hint = self.finite_primes()?;
        let f = Factorizer::default();
        let det_class = square_class_hinted(&self.det, &hint, &f)?;
        let disc = if (n * (n.saturating_sub(1)) / 2) % 2 == 1 {
            det_class.negate()
        } else {
            det_class.clone()
        };
        let d = &self.det;
        let minus_one = -Rational::one();
        let mut hasse = BTreeSet::new();
        let mut clifford = BTreeSet::new();
        for v in &places {
            let s = self.hasse_at(v);
            if s == -1 {
                hasse.insert(v.clone());
            }
            // Clifford class from the Hasse class, by n mod 8.
            let correction = match n % 8 {
                1 | 2 => 1,
                3 | 4 => hilbert_symbol(&minus_one, &-d, v)?,
                5 | 6 => hilbert_symbol(&minus_one, &minus_one, v)?,
                _ => hilbert_symbol(&minus_one, d, v)?,
            };
            if s * correction == -1 {
                clifford.insert(v.clone());
            }
        }
        Ok(FormInvariants {
            dim: n,
            det_class,
            disc,
            hasse: BrauerClass::from_places(hasse)?,
            clifford: BrauerClass::from_places(clifford)?,
            signature: self.signature(),
        })
    }

    /// Hasse-Minkowski decision of isotropy over ℚ.
    pub fn decide_isotropic(&self) -> Result<bool, QformError> {
        let n = self.dim();
        if n == 1 {
            return Ok(false);
        }
        if n == 2 {
            return Ok(is_rational_square(&-self.det.clone()));
        }
        if self.is_definite() {
            return Ok(false);
        }
        if n >= 5 {
            return Ok(true);
        }
        for v in self.relevant_places()? {
            let Place::Finite(p) = v else { continue };
            if !self.isotropic_at(p)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Isotropy over ℚ_p of a form of dimension 3 or 4 (larger forms are
    /// always locally isotropic, smaller ones are handled by the caller).
    pub fn isotropic_at(&self, p: &BigUint) -> Result<bool, QformError> {
        let n = self.dim();
        if n >= 5 {
            return Ok(true);
        }
        if n < 3 {
            return Err(QformError::Unsupported(format!("local isotropy in dimension {n}")));
        }
        let v = Place::Finite(p.clone());
        let d = &self.det;
        let minus_one = -Rational::one();
        let c = self.hasse_at(&v);
        Ok(if n == 3 {
            c == hilbert_symbol(&minus_one, &-d, &v)?
        } else {
            !local::is_local_square(d, p) || c == hilbert_symbol(&minus_one, &minus_one, &v)?
        })
    }

    /// Isotropy with an explicit witness, using the default search ceiling.
    pub fn is_isotropic(&self) -> Result<Isotropy, QformError> {
        self.is_isotropic_with(search_ceiling())
    }

    pub fn is_isotropic_with(&self, ceiling: u64) -> Result<Isotropy, QformError> {
        if !self.decide_isotropic()? {
            return Ok(Isotropy::Anisotropic);
        }
        let hint = self.finite_primes()?;
        let x = lattice::find_isotropic(&self.gram, &hint, ceiling)?;
        debug_assert!(self.eval(&x).is_zero());
        Ok(Isotropy::Isotropic(x))
    }

    pub fn witt_decompose(&self) -> Result<WittDecomposition, QformError> {
        witt::decompose(self, search_ceiling())
    }

    pub fn witt_decompose_with(&self, ceiling: u64) -> Result<WittDecomposition, QformError> {
        witt::decompose(self, ceiling)
    }

    /// Hyperbolicity by invariants: q ≅ m·H iff the invariants match those of m·H.
    pub fn is_hyperbolic(&self) -> Result<bool, QformError> {
        let n = self.dim();
        if n % 2 == 1 {
            return Ok(false);
        }
        let h = Self::hyperbolic(n / 2)?;
        self.is_isometric(&h)
    }

    /// Isometry over ℚ by the complete invariant set.
    pub fn is_isometric(&self, other: &Self) -> Result<bool, QformError> {
        if self.dim() != other.dim() {
            return Ok(false);
        }
        let a = self.invariants()?;
        let b = other.invariants()?;
        Ok(a.disc == b.disc && a.hasse == b.hasse && a.signature == b.signature)
    }

    /// Membership in the n-th power of the fundamental ideal, n ∈ 1..=4.
    pub fn in_i_n(&self, n: u32) -> Result<bool, QformError> {
        if !(1..=4).contains(&n) {
            return Err(QformError::Unsupported(format!("I^{n} membership needs n in 1..4")));
        }
        let inv = self.invariants()?;
        let mut ok = inv.dim % 2 == 0;
        if n >= 2 {
            ok &= inv.disc.is_trivial();
        }
        if n >= 3 {
            ok &= inv.clifford.is_trivial();
        }
        if n >= 4 {
            ok &= inv.signature % 16 == 0;
        }
        Ok(ok)
    }

    /// Whether the form is similar to an r-fold Pfister form, r ∈ 1..=4.
    pub fn in_gp_r(&self, r: u32) -> Result<bool, QformError> {
        if !(1..=4).contains(&r) {
            return Err(QformError::Unsupported(format!("GP_{r} membership needs r in 1..4")));
        }
        if self.dim() != 1usize << r {
            return Ok(false);
        }
        if r == 1 {
            return Ok(true);
        }
        let inv = self.invariants()?;
        let mut ok = inv.disc.is_trivial();
        if r >= 3 {
            ok &= inv.clifford.is_trivial();
        }
        if r == 4 {
            ok &= matches!(inv.signature, 0 | 16 | -16);
        }
        Ok(ok)
    }
}

fn is_rational_square(x: &Rational) -> bool {
    !x.is_negative()
        && exact_sqrt(x.numer().magnitude()).is_some()
        && exact_sqrt(x.denom().magnitude()).is_some()
}

fn square_class_hinted(
    x: &Rational,
    hint: &[BigUint],
    f: &Factorizer,
) -> Result<SquareClass, ArithError> {
    if hint.is_empty() {
        return square_class_with(x, f);
    }
    // Strip hinted primes, then reduce the (usually trivial) cofactor.
    let mut n = x.numer().magnitude() * x.denom().magnitude();
    let mut rep = BigUint::one();
    for p in hint {
        let mut e = 0u32;
        while (&n % p).is_zero() {
            n /= p;
            e += 1;
        }
        if e % 2 == 1 {
            rep *= p;
        }
    }
    let rest = square_class_with(&Rational::from_integer(BigInt::from(n)), f)?;
    let sign = if x.is_negative() { -BigInt::one() } else { BigInt::one() };
    let hinted = SquareClass::from_squarefree(sign * BigInt::from(rep));
    Ok(hinted.mul(&rest))
}

/// Symmetric Gaussian elimination returning (entries, P) with Pᵀ·G·P diagonal.
pub fn diagonalize_gram(g: &Matrix) -> Diagonalization {
    let n = g.rows();
    let mut a = g.clone();
    let mut p = Matrix::identity(n);
    for i in 0..n {
        if a[(i, i)].is_zero() {
            if let Some(j) = (i + 1..n).find(|&j| !a[(j, j)].is_zero()) {
                swap_basis(&mut a, &mut p, i, j);
            } else if let Some(j) = (i + 1..n).find(|&j| !a[(i, j)].is_zero()) {
                // e_i ← e_i + e_j gives q(e_i) = 2·b(e_i, e_j) ≠ 0.
                add_basis(&mut a, &mut p, i, j, &Rational::one());
            } else {
                continue;
            }
        }
        let piv = a[(i, i)].clone();
        for j in i + 1..n {
            if a[(i, j)].is_zero() {
                continue;
            }
            let f = -&a[(i, j)] / &piv;
            add_basis(&mut a, &mut p, j, i, &f);
        }
    }
    Diagonalization {
        entries: (0..n).map(|i| a[(i, i)].clone()).collect(),
        basis: p,
    }
}

fn swap_basis(a: &mut Matrix, p: &mut Matrix, i: usize, j: usize) {
    let n = a.rows();
    a.swap_rows(i, j);
    for r in 0..n {
        let t = a[(r, i)].clone();
        a[(r, i)] = a[(r, j)].clone();
        a[(r, j)] = t;
        let t = p[(r, i)].clone();
        p[(r, i)] = p[(r, j)].clone();
        p[(r, j)] = t;
    }
}

/// e_i ← e_i + f·e_j, applied to the Gram matrix and the basis.
fn add_basis(a: &mut Matrix, p: &mut Matrix, i: usize, j: usize, f: &Rational) {
    let n = a.rows();
    for c in 0..n {
        let v = &a[(j, c)] * f;
        a[(i, c)] += v;
    }
    for r in 0..n {
        let v = &a[(r, j)] * f;
        a[(r, i)] += v;
    }
    for r in 0..n {
        let v = &p[(r, j)] * f;
        p[(r, i)] += v;
    }
}

/// The r-fold Pfister form ⟨⟨a₁,…,a_r⟩⟩ = ⊗⟨1,−aᵢ⟩; the entry for the
/// subset S of slots is ∏_{i∈S}(−aᵢ), indexed by the bitmask of S.
pub fn pfister(slots: &[Rational]) -> Result<QuadraticForm, QformError> {
    if slots.iter().any(Zero::is_zero) {
        return Err(QformError::Arith(ArithError::ZeroInput));
    }
    let entries: Vec<Rational> = (0..1usize << slots.len())
        .map(|mask| {
            slots
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .fold(Rational::one(), |acc, (_, a)| acc * -a)
        })
        .collect();
    QuadraticForm::diagonal(&entries)
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum FormRepr {
    Diag(Vec<String>),
    Gram(Vec<Vec<String>>),
}

impl Serialize for QuadraticForm {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let repr = if self.is_diagonal() {
            FormRepr::Diag((0..self.dim()).map(|i| format_rational(&self.gram[(i, i)])).collect())
        } else {
            FormRepr::Gram(
                (0..self.dim())
                    .map(|i| self.gram.row(i).iter().map(format_rational).collect())
                    .collect(),
            )
        };
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for QuadraticForm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let parse = |s: &String| parse_rational(s).map_err(D::Error::custom);
        let gram = match FormRepr::deserialize(d)? {
            FormRepr::Diag(xs) => {
                Matrix::diagonal(&xs.iter().map(parse).collect::<Result<Vec<_>, _>>()?)
            }
            FormRepr::Gram(rows) => {
                let n = rows.len();
                if rows.iter().any(|r| r.len() != n) {
                    return Err(D::Error::custom("gram matrix must be square"));
                }
                Matrix::from_rows(
                    rows.iter()
                        .map(|r| r.iter().map(parse).collect::<Result<Vec<_>, _>>())
                        .collect::<Result<Vec<_>, _>>()?,
                )
            }
        };
        QuadraticForm::new(gram).map_err(D::Error::custom)
    }
}
