//! Structure-constant algebras with involution.
//!
//! An algebra is a basis with a sparse multiplication table. Involutions are
//! linear maps on coordinates. Algebras built from quaternion factors or from
//! a quadratic form remember how they were built so that invariants can use
//! that description, and so that files only need to store it.

mod clifford;
mod invariants;

use num_integer::Roots;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{serde_rational, ArithError, Rational};
use crate::linalg::{self, Matrix, Vector};
use crate::qform::{QformError, QuadraticForm};
use crate::quat::{QuatError, QuatInvolution, QuaternionAlgebra};

pub use clifford::{clifford_algebra, CliffordAlgebra};
pub use invariants::{adjoint_gram, split_form, E1Route, E2Pair, E2Route};

/// Tensors above this dimension skip the exhaustive involution check; their
/// factors were checked and the tensor of anti-automorphisms is one.
pub const FULL_CHECK_DIM: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CsaError {
    #[error("multiplication table has the wrong shape: {0}")]
    BadTable(String),
    #[error("unit law fails for basis element {0}")]
    BadUnit(usize),
    #[error("associativity fails on basis triple ({0}, {1}, {2})")]
    NotAssociative(usize, usize, usize),
    #[error("involution is not an anti-automorphism on basis pair ({0}, {1})")]
    NotAntiAutomorphism(usize, usize),
    #[error("map does not square to the identity")]
    NotInvolutive,
    #[error("map does not fix the unit")]
    UnitNotFixed,
    #[error("symmetric elements have dimension {0}, matching neither type")]
    UnknownType(usize),
    #[error("dimension {0} is not a perfect square")]
    NotSquareDimension(usize),
    #[error("involution is not orthogonal")]
    NotOrthogonal,
    #[error("undefined: e0 nonzero")]
    E0Nonzero,
    #[error("undefined: e1 nonzero")]
    E1Nonzero,
    #[error("routes disagree: {0}")]
    RouteMismatch(String),
    #[error("not computable: {0}")]
    Uncomputable(String),
    #[error("no symmetric Gram matrix is compatible with the involution")]
    NoSymmetricSolution,
    #[error("adjoint Gram solution space has dimension {0}")]
    AmbiguousGram(usize),
    #[error("element is not invertible")]
    NotInvertible,
    #[error("twist must be invertible and symmetric: {0}")]
    BadTwist(String),
    #[error("dimension {0} exceeds the guard")]
    DimensionGuard(usize),
    #[error("unsupported degree {0}")]
    UnsupportedDegree(usize),
    #[error(transparent)]
    Quat(#[from] QuatError),
    #[error(transparent)]
    Qform(#[from] QformError),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

type Sparse = Vec<(usize, Rational)>;

fn to_sparse(v: &[Rational]) -> Sparse {
    v.iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .map(|(i, x)| (i, x.clone()))
        .collect()
}

/// Finite-dimensional associative unital algebra over ℚ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureAlgebra {
    labels: Vec<String>,
    table: Vec<Sparse>,
    unit: Vector,
}

impl StructureAlgebra {
    /// Validated constructor; `constants[i][j]` expands eᵢ·eⱼ on the basis.
    pub fn new(
        labels: Vec<String>,
        constants: &[Vec<Vector>],
        unit: Vector,
    ) -> Result<Self, CsaError> {
        let n = labels.len();
        if constants.len() != n || unit.len() != n {
            return Err(CsaError::BadTable(format!("expected {n} rows")));
        }
        let mut table = Vec::with_capacity(n * n);
        for row in constants {
            if row.len() != n || row.iter().any(|v| v.len() != n) {
                return Err(CsaError::BadTable(format!("expected {n}×{n}×{n} constants")));
            }
            table.extend(row.iter().map(|v| to_sparse(v)));
        }
        let a = StructureAlgebra { labels, table, unit };
        a.validate()?;
        Ok(a)
    }

    pub(crate) fn from_sparse(labels: Vec<String>, table: Vec<Sparse>, unit: Vector) -> Self {
        StructureAlgebra { labels, table, unit }
    }

    /// Unit law and associativity on all basis triples.
    pub fn validate(&self) -> Result<(), CsaError> {
        let n = self.dim();
        for j in 0..n {
            let e = linalg::unit_vector(n, j);
            if self.mul(&self.unit, &e) != e || self.mul(&e, &self.unit) != e {
                return Err(CsaError::BadUnit(j));
            }
        }
        for i in 0..n {
            for j in 0..n {
                let ij = self.product_vec(i, j);
                for k in 0..n {
                    let left = self.mul(&ij, &linalg::unit_vector(n, k));
                    let right = self.mul(&linalg::unit_vector(n, i), &self.product_vec(j, k));
                    if left != right {
                        return Err(CsaError::NotAssociative(i, j, k));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn unit(&self) -> &Vector {
        &self.unit
    }

    /// eᵢ·eⱼ as (index, coefficient) pairs.
    pub fn product(&self, i: usize, j: usize) -> &[(usize, Rational)] {
        &self.table[i * self.dim() + j]
    }

    pub fn product_vec(&self, i: usize, j: usize) -> Vector {
        let mut out = vec![Rational::zero(); self.dim()];
        for (k, c) in self.product(i, j) {
            out[*k] = c.clone();
        }
        out
    }

    pub fn basis(&self, i: usize) -> Vector {
        linalg::unit_vector(self.dim(), i)
    }

    pub fn mul(&self, x: &[Rational], y: &[Rational]) -> Vector {
        let n = self.dim();
        let mut out = vec![Rational::zero(); n];
        let ys: Sparse = to_sparse(y);
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for (j, yj) in &ys {
                let c = xi * yj;
                for (k, t) in self.product(i, *j) {
                    out[*k] += &c * t;
                }
            }
        }
        out
    }

    /// Matrix of y ↦ x·y.
    pub fn left_matrix(&self, x: &[Rational]) -> Matrix {
        let cols: Vec<Vector> = (0..self.dim()).map(|j| self.mul(x, &self.basis(j))).collect();
        Matrix::from_cols(&cols)
    }

    /// Matrix of y ↦ y·x.
    pub fn right_matrix(&self, x: &[Rational]) -> Matrix {
        let cols: Vec<Vector> = (0..self.dim()).map(|j| self.mul(&self.basis(j), x)).collect();
        Matrix::from_cols(&cols)
    }

    pub fn inverse(&self, x: &[Rational]) -> Result<Vector, CsaError> {
        let inv = self.left_matrix(x).solve(&self.unit).ok_or(CsaError::NotInvertible)?;
        if self.mul(&inv, x) != self.unit {
            return Err(CsaError::NotInvertible);
        }
        Ok(inv)
    }

    pub fn scalar(&self, s: &Rational) -> Vector {
        linalg::vec_scale(&self.unit, s)
    }

    /// Scalar value of x when x ∈ ℚ·1.
    pub fn as_scalar(&self, x: &[Rational]) -> Option<Rational> {
        let (i, u) = self.unit.iter().enumerate().find(|(_, u)| !u.is_zero())?;
        let s = &x[i] / u;
        (linalg::vec_scale(&self.unit, &s) == x).then_some(s)
    }

    pub fn degree(&self) -> Result<usize, CsaError> {
        let n = self.dim();
        let d = n.sqrt();
        if d * d != n {
            return Err(CsaError::NotSquareDimension(n));
        }
        Ok(d)
    }

    /// Reduced trace trace(L_x)/deg.
    pub fn trd(&self, x: &[Rational]) -> Result<Rational, CsaError> {
        let deg = self.degree()?;
        Ok(self.left_matrix(x).trace() / Rational::from_integer(deg.into()))
    }

    /// Reduced characteristic polynomial, constant term first: the monic
    /// polynomial whose deg-th power is the characteristic polynomial of L_x.
    pub fn reduced_charpoly(&self, x: &[Rational]) -> Result<Vec<Rational>, CsaError> {
        let deg = self.degree()?;
        let full = self.left_matrix(x).charpoly();
        poly_root(&full, deg)
            .ok_or_else(|| CsaError::Uncomputable("characteristic polynomial is not a power".into()))
    }

    pub fn nrd(&self, x: &[Rational]) -> Result<Rational, CsaError> {
        let deg = self.degree()?;
        let r = self.reduced_charpoly(x)?;
        Ok(if deg % 2 == 0 { r[0].clone() } else { -r[0].clone() })
    }

    /// Kronecker tensor product; index of eᵢ⊗fⱼ is i·dim(other) + j.
    pub fn tensor(&self, other: &Self) -> Self {
        let (n, m) = (self.dim(), other.dim());
        let mut labels = Vec::with_capacity(n * m);
        for a in &self.labels {
            for b in &other.labels {
                labels.push(format!("{a}⊗{b}"));
            }
        }
        let mut table = Vec::with_capacity(n * n * m * m);
        for i1 in 0..n {
            for j1 in 0..m {
                for i2 in 0..n {
                    for j2 in 0..m {
                        let mut entry = Sparse::new();
                        for (k1, c1) in self.product(i1, i2) {
                            for (k2, c2) in other.product(j1, j2) {
                                entry.push((k1 * m + k2, c1 * c2));
                            }
                        }
                        entry.sort_by_key(|(k, _)| *k);
                        table.push(entry);
                    }
                }
            }
        }
        let unit = kron_vec(&self.unit, &other.unit);
        StructureAlgebra { labels, table, unit }
    }

    /// Basis 1, i, j, k of (a, b).
    pub fn from_quaternion(q: &QuaternionAlgebra) -> Self {
        let labels = ["1", "i", "j", "k"].map(String::from).to_vec();
        let mut table = Vec::with_capacity(16);
        for r in 0..4 {
            for c in 0..4 {
                let (coef, idx) = q.basis_product(r, c);
                table.push(vec![(idx, coef)]);
            }
        }
        StructureAlgebra {
            labels,
            table,
            unit: linalg::unit_vector(4, 0),
        }
    }

    /// Mₙ(ℚ) on matrix units, E_ij at index i·n + j.
    pub fn matrix_algebra(n: usize) -> Self {
        let mut labels = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                labels.push(format!("E{}_{}", i + 1, j + 1));
            }
        }
        let mut table = Vec::with_capacity(n.pow(4));
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        table.push(if j == k {
                            vec![(i * n + l, Rational::one())]
                        } else {
                            Vec::new()
                        });
                    }
                }
            }
        }
        let mut unit = vec![Rational::zero(); n * n];
        for i in 0..n {
            unit[i * n + i] = Rational::one();
        }
        StructureAlgebra { labels, table, unit }
    }
}

fn kron_vec(x: &[Rational], y: &[Rational]) -> Vector {
    let mut out = Vec::with_capacity(x.len() * y.len());
    for a in x {
        for b in y {
            out.push(a * b);
        }
    }
    out
}

fn poly_mul(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_pow(a: &[Rational], n: usize) -> Vec<Rational> {
    let mut out = vec![Rational::one()];
    for _ in 0..n {
        out = poly_mul(&out, a);
    }
    out
}

/// Monic r with rⁿ = p, solving for coefficients from the top down.
fn poly_root(p: &[Rational], n: usize) -> Option<Vec<Rational>> {
    let total = p.len() - 1;
    if total % n != 0 || !p[total].is_one() {
        return None;
    }
    let m = total / n;
    let mut r = vec![Rational::zero(); m + 1];
    r[m] = Rational::one();
    let nr = Rational::from_integer(n.into());
    for k in 1..=m {
        let current = poly_pow(&r, n);
        r[m - k] = (&p[total - k] - &current[total - k]) / &nr;
    }
    (poly_pow(&r, n) == p).then_some(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InvolutionType {
    Orthogonal,
    Symplectic,
}

impl InvolutionType {
    /// Type of σ₁⊗σ₂.
    pub fn tensor(self, other: Self) -> Self {
        if self == other {
            InvolutionType::Orthogonal
        } else {
            InvolutionType::Symplectic
        }
    }
}

/// An involution given by its matrix on coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Involution {
    matrix: Matrix,
    kind: InvolutionType,
}

impl Involution {
    /// Checks σ² = id, σ(1) = 1 and σ(eᵢeⱼ) = σ(eⱼ)σ(eᵢ) on all basis pairs,
    /// then reads the type off the dimension of the symmetric elements.
    pub fn new(algebra: &StructureAlgebra, matrix: Matrix) -> Result<Self, CsaError> {
        check_involution(algebra, &matrix)?;
        let n = algebra.degree()?;
        let sym = algebra.dim() - matrix.sub(&Matrix::identity(algebra.dim())).rank();
        let kind = if sym == n * (n + 1) / 2 {
            InvolutionType::Orthogonal
        } else if sym == n * (n - 1) / 2 {
            InvolutionType::Symplectic
        } else {
            return Err(CsaError::UnknownType(sym));
        };
        Ok(Involution { matrix, kind })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn kind(&self) -> InvolutionType {
        self.kind
    }

    pub fn apply(&self, x: &[Rational]) -> Vector {
        self.matrix.mul_vec(x)
    }
}

fn check_involution(algebra: &StructureAlgebra, m: &Matrix) -> Result<(), CsaError> {
    let n = algebra.dim();
    if m.rows() != n || m.cols() != n {
        return Err(CsaError::BadTable("involution matrix shape".into()));
    }
    if m.mul(m) != Matrix::identity(n) {
        return Err(CsaError::NotInvolutive);
    }
    if m.mul_vec(algebra.unit()) != *algebra.unit() {
        return Err(CsaError::UnitNotFixed);
    }
    let images: Vec<Vector> = (0..n).map(|j| m.col(j)).collect();
    for i in 0..n {
        for j in 0..n {
            let lhs = m.mul_vec(&algebra.product_vec(i, j));
            let rhs = algebra.mul(&images[j], &images[i]);
            if lhs != rhs {
                return Err(CsaError::NotAntiAutomorphism(i, j));
            }
        }
    }
    Ok(())
}

/// One tensor factor of a described algebra with involution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Factor {
    /// A quaternion algebra with γ or Int(s)∘γ.
    Quaternion {
        algebra: QuaternionAlgebra,
        involution: QuatInvolution,
    },
    /// Mₙ(ℚ) with the adjoint involution of a form.
    SplitForm { form: QuadraticForm },
}

/// Serialized description: σ = Int(twist)∘(σ₁⊗…⊗σ_r).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub factors: Vec<Factor>,
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        with = "serde_rational::option_vec"
    )]
    pub twist: Option<Vector>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Provenance", into = "Provenance")]
pub struct InvolutionAlgebra {
    algebra: StructureAlgebra,
    sigma: Involution,
    provenance: Provenance,
}

impl TryFrom<Provenance> for InvolutionAlgebra {
    type Error = CsaError;
    fn try_from(p: Provenance) -> Result<Self, CsaError> {
        Self::from_provenance(&p)
    }
}

impl From<InvolutionAlgebra> for Provenance {
    fn from(a: InvolutionAlgebra) -> Provenance {
        a.provenance
    }
}

impl InvolutionAlgebra {
    pub fn from_quaternion(q: &QuaternionAlgebra, inv: &QuatInvolution) -> Result<Self, CsaError> {
        inv.validate(q)?;
        let algebra = StructureAlgebra::from_quaternion(q);
        let sigma = Involution::new(&algebra, inv.matrix(q))?;
        Ok(InvolutionAlgebra {
            algebra,
            sigma,
            provenance: Provenance {
                factors: vec![Factor::Quaternion {
                    algebra: q.clone(),
                    involution: inv.clone(),
                }],
                twist: None,
            },
        })
    }

    /// (Mₙ(ℚ), ad_q) with σ(M) = G⁻¹·Mᵀ·G.
    pub fn split_adjoint(q: &QuadraticForm) -> Result<Self, CsaError> {
        let n = q.dim();
        let g = q.gram();
        let gi = g.inverse().ok_or(QformError::Degenerate)?;
        let algebra = StructureAlgebra::matrix_algebra(n);
        let mut m = Matrix::zeros(n * n, n * n);
        for i in 0..n {
            for j in 0..n {
                // σ(E_ij) = G⁻¹·E_ji·G has (k, l) entry (G⁻¹)_kj·G_il.
                for k in 0..n {
                    for l in 0..n {
                        m[(k * n + l, i * n + j)] = &gi[(k, j)] * &g[(i, l)];
                    }
                }
            }
        }
        let sigma = if n * n <= FULL_CHECK_DIM {
            Involution::new(&algebra, m)?
        } else {
            Involution {
                matrix: m,
                kind: InvolutionType::Orthogonal,
            }
        };
        Ok(InvolutionAlgebra {
            algebra,
            sigma,
            provenance: Provenance {
                factors: vec![Factor::SplitForm { form: q.clone() }],
                twist: None,
            },
        })
    }

    /// (A, σ_A)⊗(B, σ_B) with σ_A⊗σ_B.
    pub fn tensor(&self, other: &Self) -> Result<Self, CsaError> {
        let algebra = self.algebra.tensor(&other.algebra);
        let matrix = self.sigma.matrix.kronecker(&other.sigma.matrix);
        let kind = self.sigma.kind.tensor(other.sigma.kind);
        if algebra.dim() <= FULL_CHECK_DIM {
            let checked = Involution::new(&algebra, matrix.clone())?;
            debug_assert_eq!(checked.kind, kind);
        }
        let mut factors = self.provenance.factors.clone();
        factors.extend(other.provenance.factors.iter().cloned());
        let twist = match (&self.provenance.twist, &other.provenance.twist) {
            (None, None) => None,
            (x, y) => {
                let a = x.clone().unwrap_or_else(|| self.algebra.unit.clone());
                let b = y.clone().unwrap_or_else(|| other.algebra.unit.clone());
                Some(kron_vec(&a, &b))
            }
        };
        Ok(InvolutionAlgebra {
            algebra,
            sigma: Involution { matrix, kind },
            provenance: Provenance { factors, twist },
        })
    }

    /// Int(u)∘σ for σ-symmetric invertible u.
    pub fn twisted(&self, u: &[Rational]) -> Result<Self, CsaError> {
        if u.len() != self.dim() {
            return Err(CsaError::BadTwist("wrong length".into()));
        }
        if self.sigma.apply(u) != u {
            return Err(CsaError::BadTwist("not symmetric".into()));
        }
        let inv = self
            .algebra
            .inverse(u)
            .map_err(|_| CsaError::BadTwist("not invertible".into()))?;
        let conj = self
            .algebra
            .left_matrix(u)
            .mul(&self.algebra.right_matrix(&inv));
        let matrix = conj.mul(&self.sigma.matrix);
        let sigma = if self.dim() <= FULL_CHECK_DIM {
            Involution::new(&self.algebra, matrix)?
        } else {
            Involution {
                matrix,
                kind: self.sigma.kind,
            }
        };
        let twist = match &self.provenance.twist {
            None => u.to_vec(),
            Some(t) => self.algebra.mul(u, t),
        };
        Ok(InvolutionAlgebra {
            algebra: self.algebra.clone(),
            sigma,
            provenance: Provenance {
                factors: self.provenance.factors.clone(),
                twist: Some(twist),
            },
        })
    }

    pub fn from_factor(f: &Factor) -> Result<Self, CsaError> {
        match f {
            Factor::Quaternion { algebra, involution } => Self::from_quaternion(algebra, involution),
            Factor::SplitForm { form } => Self::split_adjoint(form),
        }
    }

    pub fn from_provenance(p: &Provenance) -> Result<Self, CsaError> {
        let Some((first, rest)) = p.factors.split_first() else {
            return Err(CsaError::BadTable("no factors".into()));
        };
        let mut out = Self::from_factor(first)?;
        for f in rest {
            out = out.tensor(&Self::from_factor(f)?)?;
        }
        match &p.twist {
            None => Ok(out),
            Some(u) => out.twisted(u),
        }
    }

    pub fn algebra(&self) -> &StructureAlgebra {
        &self.algebra
    }

    pub fn sigma(&self) -> &Involution {
        &self.sigma
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    pub fn degree(&self) -> Result<usize, CsaError> {
        self.algebra.degree()
    }

    pub fn kind(&self) -> InvolutionType {
        self.sigma.kind
    }

    /// Exhaustive involution check, also for large tensors.
    pub fn validate(&self) -> Result<(), CsaError> {
        check_involution(&self.algebra, &self.sigma.matrix)
    }

    /// Images of the basis under an explicit isomorphism A ≅ Mₙ(ℚ).
    ///
    /// Split quaternion factors and form factors are split one at a time.
    /// Each remaining quaternion factor Q is paired with a later factor Q′ of
    /// the same class through Q⊗Q′ ≅ End(Q), x⊗y ↦ (z ↦ x·z·γ(φ(y))) for an
    /// isomorphism φ: Q′ → Q. Returns `None` when this pairing does not cover
    /// every factor (in particular whenever A is not split).
    pub fn splitting(&self) -> Result<Option<Vec<Matrix>>, CsaError> {
        let factors = &self.provenance.factors;
        let k = factors.len();
        let mut used = vec![false; k];
        let mut groups: Vec<(Vec<usize>, Vec<Matrix>)> = Vec::new();
        for p in 0..k {
            if used[p] {
                continue;
            }
            used[p] = true;
            match &factors[p] {
                Factor::SplitForm { form } => {
                    let n = form.dim();
                    let mut v = Vec::with_capacity(n * n);
                    for i in 0..n {
                        for j in 0..n {
                            let mut e = Matrix::zeros(n, n);
                            e[(i, j)] = Rational::one();
                            v.push(e);
                        }
                    }
                    groups.push((vec![p], v));
                }
                Factor::Quaternion { algebra, .. } if algebra.is_split()? => {
                    groups.push((vec![p], algebra.splitting_isomorphism()?.images));
                }
                Factor::Quaternion { algebra, .. } => {
                    let class = algebra.brauer_class()?;
                    let mut partner = None;
                    for (q, f) in factors.iter().enumerate().skip(p + 1) {
                        if let Factor::Quaternion { algebra: other, .. } = f {
                            if !used[q] && other.brauer_class()? == class {
                                partner = Some((q, other));
                                break;
                            }
                        }
                    }
                    let Some((q, other)) = partner else {
                        return Ok(None);
                    };
                    used[q] = true;
                    let phi = other.isomorphism_into(algebra)?;
                    let qa = StructureAlgebra::from_quaternion(algebra);
                    let mut v = Vec::with_capacity(16);
                    for x in 0..4 {
                        for y in 0..4 {
                            let right = phi[y].conj().coords.to_vec();
                            v.push(qa.left_matrix(&qa.basis(x)).mul(&qa.right_matrix(&right)));
                        }
                    }
                    groups.push((vec![p, q], v));
                }
            }
        }
        let radices: Vec<usize> = factors
            .iter()
            .map(|f| match f {
                Factor::Quaternion { .. } => 4,
                Factor::SplitForm { form } => form.dim() * form.dim(),
            })
            .collect();
        let mut images = Vec::with_capacity(self.dim());
        for b in 0..self.dim() {
            let mut digits = vec![0; k];
            let mut rest = b;
            for f in (0..k).rev() {
                digits[f] = rest % radices[f];
                rest /= radices[f];
            }
            let mut m = Matrix::identity(1);
            for (positions, imgs) in &groups {
                let sub = positions.iter().fold(0, |acc, &f| acc * radices[f] + digits[f]);
                m = m.kronecker(&imgs[sub]);
            }
            images.push(m);
        }
        Ok(Some(images))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::int;

    fn quat_alg(a: i64, b: i64, inv: QuatInvolution) -> InvolutionAlgebra {
        let q = QuaternionAlgebra::from_i64(a, b).unwrap();
        InvolutionAlgebra::from_quaternion(&q, &inv).unwrap()
    }

    fn orth_i(a: i64, b: i64) -> InvolutionAlgebra {
        let q = QuaternionAlgebra::from_i64(a, b).unwrap();
        let inv = QuatInvolution::orthogonal(&q.i()).unwrap();
        InvolutionAlgebra::from_quaternion(&q, &inv).unwrap()
    }

    #[test]
    fn quaternion_types() {
        let a = quat_alg(-1, -1, QuatInvolution::Canonical);
        assert_eq!(a.kind(), InvolutionType::Symplectic);
        assert_eq!(orth_i(2, 5).kind(), InvolutionType::Orthogonal);
        assert_eq!(a.sigma().apply(a.algebra().unit()), *a.algebra().unit());
        let q = QuaternionAlgebra::from_i64(2, 5).unwrap();
        let bad = QuatInvolution::Orthogonal(vec![int(1), int(0), int(0), int(0)]);
        assert!(InvolutionAlgebra::from_quaternion(&q, &bad).is_err());
    }

    #[test]
    fn structure_validation_rejects_bad_tables() {
        // ℚ[e] with e² = 1 but a table claiming e·1 = 0.
        let labels = vec!["1".to_string(), "e".to_string()];
        let c = vec![
            vec![vec![int(1), int(0)], vec![int(0), int(0)]],
            vec![vec![int(0), int(1)], vec![int(1), int(0)]],
        ];
        assert_eq!(
            StructureAlgebra::new(labels, &c, vec![int(1), int(0)]),
            Err(CsaError::BadUnit(1))
        );
    }

    #[test]
    fn matrix_algebra_is_associative() {
        let m = StructureAlgebra::matrix_algebra(3);
        m.validate().unwrap();
        assert_eq!(m.degree().unwrap(), 3);
    }

    #[test]
    fn canonical_tensor_is_orthogonal_of_degree_four() {
        let a = quat_alg(-1, -1, QuatInvolution::Canonical);
        let b = quat_alg(2, 3, QuatInvolution::Canonical);
        let t = a.tensor(&b).unwrap();
        assert_eq!(t.dim(), 16);
        assert_eq!(t.degree().unwrap(), 4);
        assert_eq!(t.kind(), InvolutionType::Orthogonal);
        t.algebra().validate().unwrap();
        let sym = 16 - t.sigma().matrix().sub(&Matrix::identity(16)).rank();
        assert_eq!(sym, 10);
        assert_eq!(a.tensor(&orth_i(2, 3)).unwrap().kind(), InvolutionType::Symplectic);
    }

    #[test]
    fn tensor_is_associative_up_to_relabeling() {
        let x = quat_alg(-1, 3, QuatInvolution::Canonical);
        let y = orth_i(2, -5);
        let z = quat_alg(7, 1, QuatInvolution::Canonical);
        let left = x.tensor(&y).unwrap().tensor(&z).unwrap();
        let right = x.tensor(&y.tensor(&z).unwrap()).unwrap();
        // With the Kronecker index convention both groupings give the same index.
        assert_eq!(left.algebra(), right.algebra());
        assert_eq!(left.sigma(), right.sigma());
        left.algebra().validate().unwrap();
        left.validate().unwrap();
    }

    #[test]
    fn reduced_trace_and_norm() {
        let d = quat_alg(-1, -1, QuatInvolution::Canonical)
            .tensor(&quat_alg(2, 3, QuatInvolution::Canonical))
            .unwrap();
        let a = d.algebra();
        assert_eq!(a.trd(a.unit()).unwrap(), int(4));
        assert_eq!(a.trd(&a.basis(4)).unwrap(), int(0));
        assert_eq!(a.nrd(a.unit()).unwrap(), int(1));
        // Oracle: Nrd_D(x⊗y) = nrd(x)²·nrd(y)² for quaternions of degree 2.
        let x = [int(1), int(2), int(0), int(-1)];
        let y = [int(0), int(1), int(1), int(1)];
        let q1 = QuaternionAlgebra::from_i64(-1, -1).unwrap();
        let q2 = QuaternionAlgebra::from_i64(2, 3).unwrap();
        let nx = q1.from_coords(&x).nrd();
        let ny = q2.from_coords(&y).nrd();
        let xy = kron_vec(&x, &y);
        assert_eq!(a.nrd(&xy).unwrap(), &nx * &nx * &ny * &ny);
        let z: Vector = (0..16).map(|i| int((i * 7 % 5) as i64 - 2)).collect();
        let w: Vector = (0..16).map(|i| int((i * 3 % 4) as i64 - 1)).collect();
        assert_eq!(
            a.nrd(&a.mul(&z, &w)).unwrap(),
            a.nrd(&z).unwrap() * a.nrd(&w).unwrap()
        );
        assert_eq!(a.left_matrix(&z).det(), a.nrd(&z).unwrap().pow(4));
    }

    #[test]
    fn split_adjoint_symmetric_dimension() {
        let q = QuadraticForm::diagonal_i64(&[1, 2, -3]).unwrap();
        let a = InvolutionAlgebra::split_adjoint(&q).unwrap();
        assert_eq!(a.kind(), InvolutionType::Orthogonal);
        let sym = 9 - a.sigma().matrix().sub(&Matrix::identity(9)).rank();
        assert_eq!(sym, 6);
    }

    #[test]
    fn splitting_images_are_multiplicative() {
        let a = orth_i(1, 5).tensor(&quat_alg(-1, 2, QuatInvolution::Canonical)).unwrap();
        // (−1, 2) splits: 2 = 1² + 1².
        let imgs = a.splitting().unwrap().unwrap();
        assert_eq!(imgs.len(), 16);
        let alg = a.algebra();
        for i in 0..16 {
            for j in 0..16 {
                let mut m = Matrix::zeros(4, 4);
                for (k, c) in alg.product(i, j) {
                    m = m.add(&imgs[*k].scale(c));
                }
                assert_eq!(m, imgs[i].mul(&imgs[j]));
            }
        }
        assert!(quat_alg(-1, -1, QuatInvolution::Canonical)
            .splitting()
            .unwrap()
            .is_none());
    }

    #[test]
    fn twist_and_serde_round_trip() {
        let d = quat_alg(-1, -1, QuatInvolution::Canonical)
            .tensor(&quat_alg(2, 3, QuatInvolution::Canonical))
            .unwrap();
        // i⊗j is γ-symmetric: γ(i)⊗γ(j) = (−i)⊗(−j).
        let u = d.algebra().basis(6);
        let t = d.twisted(&u).unwrap();
        assert_eq!(t.kind(), InvolutionType::Orthogonal);
        let json = serde_json::to_string(&t).unwrap();
        let back: InvolutionAlgebra = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);
        assert!(d.twisted(&d.algebra().basis(1)).is_err());
    }

    #[test]
    fn poly_root_detects_non_powers() {
        let r = vec![int(3), int(-1), int(1)];
        assert_eq!(poly_root(&poly_pow(&r, 4), 4), Some(r));
        assert_eq!(poly_root(&[int(2), int(0), int(1)], 2), None);
    }
}
