//! Products of four quaternion algebras with involution, run on instances.
//!
//! With D = (Q₁, γ₁)⊗(Q₂, γ₂) and the identification Q₃ = Q₁, Q₄ = Q₂, the
//! algebra (A, σ) = D⊗D is described by an automorphism φ = Int(c) of D.
//! Transporting γ₃⊗γ₄ along φ gives Int(u⁻¹)∘γ with u = λ·(c·γ(c))⁻¹, and
//! (A, σ) is adjoint to q_u(x) = Trd_D(x·u·γ(x)). The pipeline normalizes u
//! to reduced trace zero, exhibits a five-dimensional totally isotropic
//! subspace of q_u, and checks that q_u is hyperbolic.

mod claims;
mod report;

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{self, serde_rational, square_class, ArithError, Rational};
use crate::csa::{CsaError, InvolutionAlgebra, StructureAlgebra};
use crate::linalg::{self, Matrix, Vector};
use crate::qform::{Isotropy, QformError, QuadraticForm};
use crate::quat::{QuatError, QuatInvolution, QuaternionAlgebra};

pub use claims::{
    assemble_isotropic, build_v_q, check_claim_1, check_claim_2, extend_to_lagrangian, w_subspace,
    ClaimReport,
};
pub use report::{
    input_hash, run_batch, run_scenario, verify_u, BatchReport, Branch, InvariantCheck, ScenarioReport, UInput,
    UReport, Verdict,
};

/// Dimension of D = Q₁⊗Q₂.
pub const DIM: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ShapiroError {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("q_u0 is anisotropic")]
    Anisotropic,
    #[error("no invertible isotropic element found after {0} candidates")]
    NoInvertibleWitness(usize),
    #[error("construction failed: {0}")]
    Construction(String),
    #[error(transparent)]
    Csa(#[from] CsaError),
    #[error(transparent)]
    Qform(#[from] QformError),
    #[error(transparent)]
    Quat(#[from] QuatError),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// Scenario data: the algebras, the automorphism Int(c) of D and the scalar λ.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub seed: u64,
    pub q1: QuaternionAlgebra,
    pub q2: QuaternionAlgebra,
    #[serde(with = "serde_rational::vec")]
    pub c: Vector,
    #[serde(with = "serde_rational")]
    pub lambda: Rational,
}

const SYMBOLS: [i64; 12] = [1, -1, 2, -2, 3, -3, 5, -5, 7, -7, 11, -11];
const LAMBDAS: [i64; 4] = [1, -1, 2, -2];

impl Scenario {
    /// Deterministic sample from `seed`: symbols in ±{1,2,3,5,7,11}, c with
    /// coordinates in [−3, 3] and Nrd_D(c) ≠ 0, λ ∈ {±1, ±2}.
    pub fn sample(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sym = |rng: &mut ChaCha8Rng| arith::int(*SYMBOLS.choose(rng).expect("nonempty"));
        let q1 = QuaternionAlgebra::new(sym(&mut rng), sym(&mut rng)).expect("nonzero symbols");
        let q2 = QuaternionAlgebra::new(sym(&mut rng), sym(&mut rng)).expect("nonzero symbols");
        let d = Setting::new(&q1, &q2).expect("quaternion tensor");
        let c = loop {
            let c: Vector = (0..DIM).map(|_| arith::int(rng.gen_range(-3..=3))).collect();
            if d.is_invertible(&c) {
                break c;
            }
        };
        let lambda = arith::int(*LAMBDAS.choose(&mut rng).expect("nonempty"));
        Scenario {
            seed,
            q1,
            q2,
            c,
            lambda,
        }
    }

    pub fn validate(&self) -> Result<(), ShapiroError> {
        if self.c.len() != DIM {
            return Err(ShapiroError::Validation(format!("c needs {DIM} coordinates")));
        }
        if self.lambda.is_zero() {
            return Err(ShapiroError::Validation("lambda must be nonzero".into()));
        }
        let d = Setting::new(&self.q1, &self.q2)?;
        if !d.is_invertible(&self.c) {
            return Err(ShapiroError::Validation("c is not invertible".into()));
        }
        Ok(())
    }
}

/// D = (Q₁, γ₁)⊗(Q₂, γ₂) with e_a⊗f_b at index 4a + b.
#[derive(Debug, Clone)]
pub struct Setting {
    pub q1: QuaternionAlgebra,
    pub q2: QuaternionAlgebra,
    pub d: InvolutionAlgebra,
}

/// Builds (D, γ) = (Q₁, γ₁)⊗(Q₂, γ₂).
pub fn build_d(q1: &QuaternionAlgebra, q2: &QuaternionAlgebra) -> Result<InvolutionAlgebra, ShapiroError> {
    let a = InvolutionAlgebra::from_quaternion(q1, &QuatInvolution::Canonical)?;
    let b = InvolutionAlgebra::from_quaternion(q2, &QuatInvolution::Canonical)?;
    Ok(a.tensor(&b)?)
}

impl Setting {
    pub fn new(q1: &QuaternionAlgebra, q2: &QuaternionAlgebra) -> Result<Self, ShapiroError> {
        Ok(Setting {
            q1: q1.clone(),
            q2: q2.clone(),
            d: build_d(q1, q2)?,
        })
    }

    pub fn algebra(&self) -> &StructureAlgebra {
        self.d.algebra()
    }

    pub fn mul(&self, x: &[Rational], y: &[Rational]) -> Vector {
        self.algebra().mul(x, y)
    }

    pub fn mul3(&self, x: &[Rational], y: &[Rational], z: &[Rational]) -> Vector {
        self.mul(&self.mul(x, y), z)
    }

    pub fn gamma(&self, x: &[Rational]) -> Vector {
        self.d.sigma().apply(x)
    }

    /// Trd_D; on the tensor basis only 1⊗1 has nonzero reduced trace, equal to 4.
    pub fn trd(&self, x: &[Rational]) -> Rational {
        &x[0] * Rational::from_integer(4.into())
    }

    pub fn nrd(&self, x: &[Rational]) -> Result<Rational, ShapiroError> {
        Ok(self.algebra().nrd(x)?)
    }

    pub fn is_invertible(&self, x: &[Rational]) -> bool {
        !self.algebra().left_matrix(x).det().is_zero()
    }

    pub fn inverse(&self, x: &[Rational]) -> Result<Vector, ShapiroError> {
        Ok(self.algebra().inverse(x)?)
    }

    pub fn one(&self) -> Vector {
        self.algebra().unit().clone()
    }

    pub fn basis(&self, k: usize) -> Vector {
        linalg::unit_vector(DIM, k)
    }

    /// x ⊗ 1 for x ∈ Q₁ (coordinates on 1, i, j, k).
    pub fn embed_left(&self, x: &[Rational]) -> Vector {
        let mut v = vec![Rational::zero(); DIM];
        for a in 0..4 {
            v[4 * a] = x[a].clone();
        }
        v
    }

    /// x ⊗ y.
    pub fn pure_tensor(&self, x: &[Rational], y: &[Rational]) -> Vector {
        let mut v = Vec::with_capacity(DIM);
        for a in x {
            for b in y {
                v.push(a * b);
            }
        }
        v
    }

    /// Basis of Q₁⊗1.
    pub fn q1_basis(&self) -> Vec<Vector> {
        (0..4).map(|a| self.basis(4 * a)).collect()
    }

    /// b_z(x, y) = Trd_D(x·z·γ(y)), the polar form of q_z.
    pub fn polar(&self, z: &[Rational], x: &[Rational], y: &[Rational]) -> Rational {
        self.trd(&self.mul3(x, z, &self.gamma(y)))
    }

    /// q_z(x) = Trd_D(x·z·γ(x)).
    pub fn q(&self, z: &[Rational], x: &[Rational]) -> Rational {
        self.polar(z, x, x)
    }

    /// Gram matrix of q_z on the tensor basis.
    pub fn q_gram(&self, z: &[Rational]) -> Matrix {
        let right: Vec<Vector> = (0..DIM).map(|j| self.mul(z, &self.gamma(&self.basis(j)))).collect();
        let mut g = Matrix::zeros(DIM, DIM);
        for i in 0..DIM {
            let ei = self.basis(i);
            for (j, r) in right.iter().enumerate() {
                g[(i, j)] = self.trd(&self.mul(&ei, r));
            }
        }
        g
    }
}

/// A validated element u of D: γ(u) = u, Trd_D(u) = 0, Nrd_D(u) a nonzero square.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UElement {
    #[serde(with = "serde_rational::vec")]
    pub u: Vector,
    pub symmetric: bool,
    pub trace_zero: bool,
    pub nrd_square: bool,
    #[serde(with = "serde_rational")]
    pub nrd: Rational,
}

/// The three properties, checked without rejecting.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UFlags {
    pub symmetric: bool,
    pub trace_zero: bool,
    pub nrd_square: bool,
    #[serde(with = "serde_rational")]
    pub nrd: Rational,
}

pub fn u_flags(s: &Setting, u: &[Rational]) -> Result<UFlags, ShapiroError> {
    let nrd = s.nrd(u)?;
    Ok(UFlags {
        symmetric: s.gamma(u) == u,
        trace_zero: s.trd(u).is_zero(),
        nrd_square: !nrd.is_zero() && square_class(&nrd)?.is_trivial(),
        nrd,
    })
}

impl UElement {
    pub fn new(s: &Setting, u: Vector) -> Result<Self, ShapiroError> {
        if u.len() != DIM {
            return Err(ShapiroError::Validation(format!("u needs {DIM} coordinates")));
        }
        let f = u_flags(s, &u)?;
        let mut failed = Vec::new();
        if !f.symmetric {
            failed.push("gamma(u) = u");
        }
        if !f.trace_zero {
            failed.push("Trd_D(u) = 0");
        }
        if !f.nrd_square {
            failed.push("Nrd_D(u) is a nonzero square");
        }
        if !failed.is_empty() {
            return Err(ShapiroError::Validation(format!("u fails {}", failed.join(", "))));
        }
        Ok(UElement {
            u,
            symmetric: f.symmetric,
            trace_zero: f.trace_zero,
            nrd_square: f.nrd_square,
            nrd: f.nrd,
        })
    }
}

/// u₀ = λ·(c·γ(c))⁻¹.
pub fn initial_u(s: &Setting, c: &[Rational], lambda: &Rational) -> Result<Vector, ShapiroError> {
    let cc = s.mul(c, &s.gamma(c));
    Ok(linalg::vec_scale(&s.inverse(&cc)?, lambda))
}

/// Result of normalizing u₀ to reduced trace zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Normalized {
    #[serde(with = "serde_rational::vec")]
    pub u0: Vector,
    /// The invertible y with q_{u₀}(y) = 0, or 1 when Trd_D(u₀) = 0 already.
    #[serde(with = "serde_rational::vec")]
    pub y: Vector,
    pub u: UElement,
    /// Witnesses rejected for being zero divisors.
    pub retries: usize,
}

/// Candidates tried in [`normalize_u`] before giving up.
pub const MAX_WITNESS_CANDIDATES: usize = 2048;

/// λ·T with T(t) = Trd_D(t·γ(t)), diagonal on the tensor basis. Since
/// q_{u₀}(t·γ(c)) = λ·T(t), right multiplication by γ(c) is an isometry
/// from λ·T onto q_{u₀}.
pub fn scaled_norm_form(s: &Setting, lambda: &Rational) -> Result<QuadraticForm, ShapiroError> {
    Ok(QuadraticForm::new(s.q_gram(&s.one()).scale(lambda))?)
}

/// Matrix of t ↦ t·γ(c)·y⁻¹, an isometry from λ·T onto q_u for u = y·u₀·γ(y).
pub fn transport_matrix(s: &Setting, c: &[Rational], y: &[Rational]) -> Result<Matrix, ShapiroError> {
    let g = s.mul(&s.gamma(c), &s.inverse(y)?);
    Ok(s.right_matrix(&g))
}

/// Finds invertible y with q_{u₀}(y) = 0 and returns u = y·u₀·γ(y).
///
/// Isotropic vectors are searched on the diagonal form λ·T and carried to
/// q_{u₀} by y = t·γ(c). Starting from one witness e of λ·T, the vectors
/// w = T(x)·e − 2·b(e, x)·x are isotropic for every x; x runs over basis
/// vectors and then sums and differences of pairs until w·γ(c) is invertible.
pub fn normalize_u(s: &Setting, c: &[Rational], lambda: &Rational) -> Result<Normalized, ShapiroError> {
    let u0 = initial_u(s, c, lambda)?;
    if s.trd(&u0).is_zero() {
        return Ok(Normalized {
            u: UElement::new(s, u0.clone())?,
            u0,
            y: s.one(),
            retries: 0,
        });
    }
    let form = scaled_norm_form(s, lambda)?;
    let e = match form.is_isotropic()? {
        Isotropy::Isotropic(e) => linalg::to_rational_vec(&linalg::primitive_integer_vector(&e)),
        Isotropy::Anisotropic => return Err(ShapiroError::Anisotropic),
    };
    let gc = s.gamma(c);
    let lift = |t: &[Rational]| s.mul(t, &gc);
    let mut retries = 0;
    let mut found = None;
    if s.is_invertible(&lift(&e)) {
        found = Some(lift(&e));
    } else {
        for x in witness_directions().take(MAX_WITNESS_CANDIDATES) {
            let qx = form.eval(&x);
            let bex = form.polar(&e, &x);
            let w = linalg::vec_sub(
                &linalg::vec_scale(&e, &qx),
                &linalg::vec_scale(&x, &(bex * Rational::from_integer(2.into()))),
            );
            retries += 1;
            if w.iter().all(|t| t.is_zero()) {
                continue;
            }
            let y = lift(&w);
            if s.is_invertible(&y) {
                found = Some(y);
                break;
            }
        }
    }
    let y = found.ok_or(ShapiroError::NoInvertibleWitness(retries))?;
    debug_assert!(s.q(&u0, &y).is_zero());
    let u = s.mul3(&y, &u0, &s.gamma(&y));
    Ok(Normalized {
        u0,
        y,
        u: UElement::new(s, u)?,
        retries,
    })
}

fn witness_directions() -> impl Iterator<Item = Vector> {
    let singles = (0..DIM).map(|k| linalg::unit_vector(DIM, k));
    let pairs = (0..DIM).flat_map(|k| {
        (k + 1..DIM).flat_map(move |l| {
            [1i64, -1].into_iter().map(move |sign| {
                let mut v = linalg::unit_vector(DIM, k);
                v[l] = arith::int(sign);
                v
            })
        })
    });
    singles.chain(pairs)
}

/// The full construction of u for a scenario.
pub fn make_u(scenario: &Scenario) -> Result<Normalized, ShapiroError> {
    let s = Setting::new(&scenario.q1, &scenario.q2)?;
    normalize_u(&s, &scenario.c, &scenario.lambda)
}

/// q_u as a quadratic form on D.
pub fn q_u_form(s: &Setting, u: &UElement) -> Result<QuadraticForm, ShapiroError> {
    QuadraticForm::new(s.q_gram(&u.u)).map_err(|e| match e {
        QformError::Degenerate => ShapiroError::Validation("q_u is degenerate".into()),
        e => e.into(),
    })
}

impl Setting {
    /// Right multiplication by y as a matrix; q_{y·z·γ(y)} = Rᵀ·G_z·R.
    pub fn right_matrix(&self, y: &[Rational]) -> Matrix {
        self.algebra().right_matrix(y)
    }

    pub fn scalar_of(&self, x: &[Rational]) -> Option<Rational> {
        self.algebra().as_scalar(x)
    }

    pub fn is_one(&self, x: &[Rational]) -> bool {
        self.scalar_of(x).is_some_and(|s| s.is_one())
    }
}
