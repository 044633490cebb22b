//! Quaternion algebras (a, b) over ℚ with basis 1, i, j, k.

use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{brauer_class_of_symbol, serde_rational, ArithError, BrauerClass, Rational};
use crate::linalg::{self, Matrix, Vector};
use crate::qform::{self, Isotropy, QformError, QuadraticForm};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuatError {
    #[error("elements belong to different quaternion algebras")]
    MixedAlgebras,
    #[error("quaternion symbol entries must be nonzero")]
    ZeroSymbol,
    #[error("element is not invertible")]
    NotInvertible,
    #[error("element is not pure (nonzero reduced trace)")]
    NotPure,
    #[error("quaternion algebra is not split")]
    NotSplit,
    #[error("no isomorphism found between {0} and {1}")]
    NoIsomorphism(String, String),
    #[error(transparent)]
    Qform(#[from] QformError),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuaternionAlgebra {
    #[serde(with = "serde_rational")]
    pub a: Rational,
    #[serde(with = "serde_rational")]
    pub b: Rational,
}

impl fmt::Display for QuaternionAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {})",
            crate::arith::format_rational(&self.a),
            crate::arith::format_rational(&self.b)
        )
    }
}

/// Sparse product table: `MULT[r][c] = (coefficient as monomial in a, b, index)`.
/// The coefficient is sign·a^ea·b^eb.
const MULT: [[(i8, u8, u8, usize); 4]; 4] = [
    [(1, 0, 0, 0), (1, 0, 0, 1), (1, 0, 0, 2), (1, 0, 0, 3)],
    [(1, 0, 0, 1), (1, 1, 0, 0), (1, 0, 0, 3), (1, 1, 0, 2)],
    [(1, 0, 0, 2), (-1, 0, 0, 3), (1, 0, 1, 0), (-1, 0, 1, 1)],
    [(1, 0, 0, 3), (-1, 1, 0, 2), (1, 0, 1, 1), (-1, 1, 1, 0)],
];

impl QuaternionAlgebra {
    pub fn new(a: Rational, b: Rational) -> Result<Self, QuatError> {
        if a.is_zero() || b.is_zero() {
            return Err(QuatError::ZeroSymbol);
        }
        Ok(QuaternionAlgebra { a, b })
    }

    pub fn from_i64(a: i64, b: i64) -> Result<Self, QuatError> {
        Self::new(crate::arith::int(a), crate::arith::int(b))
    }

    /// e_r·e_c = coefficient·e_index on the basis 1, i, j, k.
    pub fn basis_product(&self, r: usize, c: usize) -> (Rational, usize) {
        let (s, ea, eb, idx) = MULT[r][c];
        let mut coef = Rational::from_integer(s.into());
        if ea == 1 {
            coef *= &self.a;
        }
        if eb == 1 {
            coef *= &self.b;
        }
        (coef, idx)
    }

    pub fn element(&self, coords: [Rational; 4]) -> QuaternionElement {
        QuaternionElement {
            algebra: self.clone(),
            coords,
        }
    }

    pub fn from_coords(&self, c: &[Rational]) -> QuaternionElement {
        assert_eq!(c.len(), 4);
        self.element([c[0].clone(), c[1].clone(), c[2].clone(), c[3].clone()])
    }

    pub fn basis(&self, idx: usize) -> QuaternionElement {
        let mut c: [Rational; 4] = Default::default();
        c[idx] = Rational::one();
        self.element(c)
    }

    pub fn one(&self) -> QuaternionElement {
        self.basis(0)
    }

    pub fn i(&self) -> QuaternionElement {
        self.basis(1)
    }

    pub fn j(&self) -> QuaternionElement {
        self.basis(2)
    }

    pub fn k(&self) -> QuaternionElement {
        self.basis(3)
    }

    /// The norm form ⟨1, −a, −b, ab⟩ = ⟨⟨a, b⟩⟩.
    pub fn norm_form(&self) -> QuadraticForm {
        qform::pfister(&[self.a.clone(), self.b.clone()]).expect("nonzero symbol")
    }

    pub fn brauer_class(&self) -> Result<BrauerClass, QuatError> {
        Ok(brauer_class_of_symbol(&self.a, &self.b)?)
    }

    pub fn is_split(&self) -> Result<bool, QuatError> {
        Ok(self.brauer_class()?.is_trivial())
    }

    /// A nonzero element of reduced norm 0, smallest sup-norm first and
    /// lexicographic among equal norms.
    pub fn zero_divisor(&self) -> Result<QuaternionElement, QuatError> {
        if !self.is_split()? {
            return Err(QuatError::NotSplit);
        }
        let nf = self.norm_form();
        for r in 1i64..=12 {
            let side = 2 * r + 1;
            let mut found: Option<[i64; 4]> = None;
            for idx in 0..side.pow(4) {
                let mut x = [0i64; 4];
                let mut t = idx;
                for c in (0..4).rev() {
                    x[c] = t % side - r;
                    t /= side;
                }
                if x.iter().map(|v| v.abs()).max() != Some(r) {
                    continue;
                }
                let xv: Vec<Rational> = x.iter().map(|&v| crate::arith::int(v)).collect();
                if nf.eval(&xv).is_zero() {
                    found = Some(x);
                    break;
                }
            }
            if let Some(x) = found {
                return Ok(self.element(x.map(crate::arith::int)));
            }
        }
        match nf.is_isotropic()? {
            Isotropy::Isotropic(x) => Ok(self.from_coords(&x)),
            Isotropy::Anisotropic => Err(QuatError::NotSplit),
        }
    }

    /// Explicit isomorphism onto M₂(ℚ) through left multiplication on the
    /// left ideal generated by a zero divisor.
    pub fn splitting_isomorphism(&self) -> Result<SplittingMap, QuatError> {
        let x = self.zero_divisor()?;
        let gens: Vec<QuaternionElement> = (0..4).map(|m| self.basis(m).mul(&x)).collect();
        let mut chosen: Vec<Vector> = Vec::new();
        for g in &gens {
            let mut trial = chosen.clone();
            trial.push(g.coords.to_vec());
            if linalg::span_rank(&trial) == trial.len() {
                chosen = trial;
            }
            if chosen.len() == 2 {
                break;
            }
        }
        let frame = Matrix::from_cols(&chosen);
        let images = (0..4)
            .map(|m| {
                let e = self.basis(m);
                let cols: Vec<Vector> = chosen
                    .iter()
                    .map(|f| {
                        let prod = e.mul(&self.from_coords(f));
                        frame.solve(&prod.coords).expect("left ideal is stable")
                    })
                    .collect();
                Matrix::from_cols(&cols)
            })
            .collect();
        Ok(SplittingMap {
            algebra: self.clone(),
            images,
        })
    }

    /// Images of 1, i, j, k under an isomorphism self → other. Both algebras
    /// must have the same class and `other` must not split: then the pure
    /// norm form of `other` is anisotropic and every isotropy witness below
    /// has a nonzero last coordinate.
    pub fn isomorphism_into(&self, other: &QuaternionAlgebra) -> Result<[QuaternionElement; 4], QuatError> {
        let fail = || QuatError::NoIsomorphism(self.to_string(), other.to_string());
        if self.brauer_class()? != other.brauer_class()? || other.is_split()? {
            return Err(fail());
        }
        let (a, b) = (&other.a, &other.b);
        let pure_gram = Matrix::diagonal(&[-a.clone(), -b.clone(), a * b]);
        let pure = |v: &[Rational]| other.element([Rational::zero(), v[0].clone(), v[1].clone(), v[2].clone()]);
        // I with I² = self.a: −a·x₁² − b·x₂² + ab·x₃² + self.a·t² = 0.
        let f = QuadraticForm::diagonal(&[-a.clone(), -b.clone(), a * b, self.a.clone()])?;
        let Isotropy::Isotropic(w) = f.is_isotropic()? else {
            return Err(fail());
        };
        if w[3].is_zero() {
            return Err(fail());
        }
        let iv = linalg::vec_scale(&w[..3], &w[3].recip());
        // J pure, orthogonal to I for the norm form, with J² = self.b.
        let row = pure_gram.mul_vec(&iv);
        let comp = Matrix::from_rows(vec![row]).nullspace();
        let b2 = Matrix::from_rows(
            comp.iter()
                .map(|x| comp.iter().map(|y| linalg::bilinear(&pure_gram, x, y)).collect())
                .collect(),
        );
        let g = QuadraticForm::new(b2)?.orthogonal_sum(&QuadraticForm::diagonal(&[self.b.clone()])?);
        let Isotropy::Isotropic(w) = g.is_isotropic()? else {
            return Err(fail());
        };
        if w[2].is_zero() {
            return Err(fail());
        }
        let jv = linalg::vec_scale(
            &linalg::vec_add(&linalg::vec_scale(&comp[0], &w[0]), &linalg::vec_scale(&comp[1], &w[1])),
            &w[2].recip(),
        );
        let (i, j) = (pure(&iv), pure(&jv));
        let k = i.mul(&j);
        let ok = i.mul(&i).as_scalar().as_ref() == Some(&self.a)
            && j.mul(&j).as_scalar().as_ref() == Some(&self.b)
            && j.mul(&i) == k.scale(&-Rational::one());
        if !ok {
            return Err(fail());
        }
        Ok([other.one(), i, j, k])
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuaternionElement {
    pub algebra: QuaternionAlgebra,
    pub coords: [Rational; 4],
}

impl QuaternionElement {
    fn check(&self, other: &Self) -> Result<(), QuatError> {
        if self.algebra != other.algebra {
            return Err(QuatError::MixedAlgebras);
        }
        Ok(())
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, QuatError> {
        self.check(other)?;
        Ok(self.mul(other))
    }

    /// Product; panics on mixed algebras (use [`Self::try_mul`] for a checked version).
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.algebra, other.algebra, "mixed quaternion algebras");
        let mut out: [Rational; 4] = Default::default();
        for r in 0..4 {
            if self.coords[r].is_zero() {
                continue;
            }
            for c in 0..4 {
                if other.coords[c].is_zero() {
                    continue;
                }
                let (coef, idx) = self.algebra.basis_product(r, c);
                out[idx] += coef * &self.coords[r] * &other.coords[c];
            }
        }
        self.algebra.element(out)
    }

    pub fn add(&self, other: &Self) -> Self {
        let c = std::array::from_fn(|i| &self.coords[i] + &other.coords[i]);
        self.algebra.element(c)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let c = std::array::from_fn(|i| &self.coords[i] - &other.coords[i]);
        self.algebra.element(c)
    }

    pub fn scale(&self, s: &Rational) -> Self {
        let c = std::array::from_fn(|i| &self.coords[i] * s);
        self.algebra.element(c)
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    pub fn trd(&self) -> Rational {
        &self.coords[0] * Rational::from_integer(2.into())
    }

    pub fn nrd(&self) -> Rational {
        let [x0, x1, x2, x3] = &self.coords;
        let (a, b) = (&self.algebra.a, &self.algebra.b);
        x0 * x0 - a * x1 * x1 - b * x2 * x2 + a * b * x3 * x3
    }

    /// γ(x) = Trd(x) − x.
    pub fn conj(&self) -> Self {
        let c = std::array::from_fn(|i| if i == 0 { self.coords[0].clone() } else { -&self.coords[i] });
        self.algebra.element(c)
    }

    pub fn is_pure(&self) -> bool {
        self.coords[0].is_zero()
    }

    pub fn inverse(&self) -> Result<Self, QuatError> {
        let n = self.nrd();
        if n.is_zero() {
            return Err(QuatError::NotInvertible);
        }
        Ok(self.conj().scale(&n.recip()))
    }

    /// Scalar part if the element lies in ℚ·1.
    pub fn as_scalar(&self) -> Option<Rational> {
        self.coords[1..]
            .iter()
            .all(Zero::is_zero)
            .then(|| self.coords[0].clone())
    }
}

/// An involution of a quaternion algebra: γ or Int(s)∘γ for pure invertible s.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuatInvolution {
    Canonical,
    Orthogonal(#[serde(with = "serde_rational::vec")] Vec<Rational>),
}

impl QuatInvolution {
    /// Int(s)∘γ: x ↦ s·γ(x)·s⁻¹, validated.
    pub fn orthogonal(s: &QuaternionElement) -> Result<Self, QuatError> {
        if !s.is_pure() {
            return Err(QuatError::NotPure);
        }
        if s.nrd().is_zero() {
            return Err(QuatError::NotInvertible);
        }
        Ok(QuatInvolution::Orthogonal(s.coords.to_vec()))
    }

    pub fn validate(&self, q: &QuaternionAlgebra) -> Result<(), QuatError> {
        match self {
            QuatInvolution::Canonical => Ok(()),
            QuatInvolution::Orthogonal(s) => {
                if s.len() != 4 {
                    return Err(QuatError::NotPure);
                }
                Self::orthogonal(&q.from_coords(s)).map(|_| ())
            }
        }
    }

    pub fn apply(&self, x: &QuaternionElement) -> QuaternionElement {
        match self {
            QuatInvolution::Canonical => x.conj(),
            QuatInvolution::Orthogonal(s) => {
                let s = x.algebra.from_coords(s);
                s.mul(&x.conj()).mul(&s.inverse().expect("validated"))
            }
        }
    }

    /// Matrix acting on coordinates (columns are images of 1, i, j, k).
    pub fn matrix(&self, q: &QuaternionAlgebra) -> Matrix {
        let cols: Vec<Vector> = (0..4).map(|m| self.apply(&q.basis(m)).coords.to_vec()).collect();
        Matrix::from_cols(&cols)
    }

    pub fn is_orthogonal(&self) -> bool {
        matches!(self, QuatInvolution::Orthogonal(_))
    }
}

/// Images of 1, i, j, k under an isomorphism Q → M₂(ℚ).
#[derive(Debug, Clone)]
pub struct SplittingMap {
    pub algebra: QuaternionAlgebra,
    pub images: Vec<Matrix>,
}

impl SplittingMap {
    pub fn apply(&self, x: &QuaternionElement) -> Matrix {
        let mut m = Matrix::zeros(2, 2);
        for (c, img) in x.coords.iter().zip(&self.images) {
            if !c.is_zero() {
                m = m.add(&img.scale(c));
            }
        }
        m
    }
}
