//! Adjoint Gram extraction and the invariants e₀, e₁, e₂ of (A, σ).

use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::{CsaError, Factor, InvolutionAlgebra, InvolutionType};
use crate::arith::{brauer_class_of_symbol, square_class, BrauerClass, Rational, SquareClass};
use crate::linalg::{self, Echelon, Matrix};
use crate::qform::QuadraticForm;
use crate::quat::QuatInvolution;

/// Symmetric G, unique up to scalars, with σ(M) = G⁻¹·Mᵀ·G under `iso`.
/// Normalized to a primitive integral matrix whose first nonzero entry is positive.
pub fn adjoint_gram(a: &InvolutionAlgebra, iso: &[Matrix]) -> Result<QuadraticForm, CsaError> {
    let dim = a.dim();
    if iso.len() != dim {
        return Err(CsaError::BadTable("isomorphism has the wrong number of images".into()));
    }
    let n = iso[0].rows();
    let unknowns = n * n;
    let sigma_images: Vec<Matrix> = (0..dim)
        .map(|b| {
            let col = a.sigma().matrix().col(b);
            let mut m = Matrix::zeros(n, n);
            for (k, c) in col.iter().enumerate() {
                if !c.is_zero() {
                    m = m.add(&iso[k].scale(c));
                }
            }
            m
        })
        .collect();
    // G·σ(M) = Mᵀ·G is linear in G; single-factor basis elements come first
    // since they generate and usually pin G down quickly.
    let mut order: Vec<usize> = (0..dim).collect();
    let radices = factor_dims(a);
    order.sort_by_key(|&b| (non_unit_digits(b, &radices), b));
    let mut ech = Echelon::new(unknowns);
    for &b in &order {
        let (x, y) = (&iso[b], &sigma_images[b]);
        for r in 0..n {
            for c in 0..n {
                let mut row = vec![Rational::zero(); unknowns];
                for m in 0..n {
                    row[r * n + m] += &y[(m, c)];
                    row[m * n + c] -= &x[(m, r)];
                }
                ech.insert(&row);
            }
        }
        if ech.rank() + 1 >= unknowns {
            break;
        }
    }
    let null = ech.nullspace();
    match null.len() {
        0 => return Err(CsaError::NoSymmetricSolution),
        1 => {}
        k => return Err(CsaError::AmbiguousGram(k)),
    }
    let flat = linalg::to_rational_vec(&linalg::primitive_integer_vector(&null[0]));
    let g = Matrix::from_rows(flat.chunks(n).map(|r| r.to_vec()).collect());
    for b in 0..dim {
        if g.mul(&sigma_images[b]) != iso[b].transpose().mul(&g) {
            return Err(CsaError::NoSymmetricSolution);
        }
    }
    if !g.is_symmetric() {
        return Err(CsaError::NoSymmetricSolution);
    }
    Ok(QuadraticForm::new(g)?)
}

fn factor_dims(a: &InvolutionAlgebra) -> Vec<usize> {
    a.provenance()
        .factors
        .iter()
        .map(|f| match f {
            Factor::Quaternion { .. } => 4,
            Factor::SplitForm { form } => form.dim() * form.dim(),
        })
        .collect()
}

fn non_unit_digits(mut b: usize, radices: &[usize]) -> usize {
    let mut count = 0;
    for r in radices.iter().rev() {
        if b % r != 0 {
            count += 1;
        }
        b /= r;
    }
    count
}

/// The adjoint form when every factor splits.
pub fn split_form(a: &InvolutionAlgebra) -> Result<Option<QuadraticForm>, CsaError> {
    match a.splitting()? {
        Some(iso) => Ok(Some(adjoint_gram(a, &iso)?)),
        None => Ok(None),
    }
}

impl InvolutionAlgebra {
    /// deg(A) mod 2.
    pub fn e0(&self) -> Result<u8, CsaError> {
        if self.kind() != InvolutionType::Orthogonal {
            return Err(CsaError::NotOrthogonal);
        }
        Ok((self.degree()? % 2) as u8)
    }

    fn require_e0_zero(&self) -> Result<(), CsaError> {
        if self.e0()? != 0 {
            return Err(CsaError::E0Nonzero);
        }
        Ok(())
    }

    /// Every available computation of the discriminant of σ.
    pub fn e1_routes(&self) -> Result<Vec<(E1Route, SquareClass)>, CsaError> {
        self.require_e0_zero()?;
        let mut out = Vec::new();
        if let Some(q) = split_form(self)? {
            out.push((E1Route::Adjoint, q.invariants()?.disc.clone()));
        }
        let p = self.provenance();
        let quats: Option<Vec<_>> = p
            .factors
            .iter()
            .map(|f| match f {
                Factor::Quaternion { algebra, involution } => Some((algebra, involution)),
                Factor::SplitForm { .. } => None,
            })
            .collect();
        if let Some(quats) = quats {
            if let [(q, QuatInvolution::Orthogonal(s))] = quats.as_slice() {
                let mut s = q.from_coords(s);
                if let Some(t) = &p.twist {
                    s = q.from_coords(t).mul(&s);
                }
                out.push((E1Route::PureSquare, square_class(&s.mul(&s).coords[0])?));
            }
            if let [(q1, i1), (q2, i2)] = quats.as_slice() {
                let lift = |q: &crate::quat::QuaternionAlgebra, inv: &QuatInvolution| match inv {
                    QuatInvolution::Canonical => q.one().coords.to_vec(),
                    QuatInvolution::Orthogonal(s) => s.clone(),
                };
                let alg = self.algebra();
                let mut u = super::kron_vec(&lift(q1, i1), &lift(q2, i2));
                if let Some(t) = &p.twist {
                    u = alg.mul(t, &u);
                }
                out.push((E1Route::ReducedNorm, square_class(&alg.nrd(&u)?)?));
            }
        }
        if p.twist.is_none() && p.factors.len() >= 2 && self.factor_degrees().iter().all(|d| d % 2 == 0) {
            out.push((E1Route::ProductRule, SquareClass::one()));
        }
        Ok(out)
    }

    fn factor_degrees(&self) -> Vec<usize> {
        self.provenance()
            .factors
            .iter()
            .map(|f| match f {
                Factor::Quaternion { .. } => 2,
                Factor::SplitForm { form } => form.dim(),
            })
            .collect()
    }

    /// Discriminant of σ; all applicable routes must agree.
    pub fn e1(&self) -> Result<SquareClass, CsaError> {
        let routes = self.e1_routes()?;
        let Some((_, first)) = routes.first() else {
            return Err(CsaError::Uncomputable("no route computes e1 for this algebra".into()));
        };
        if let Some((r, other)) = routes.iter().find(|(_, c)| c != first) {
            return Err(CsaError::RouteMismatch(format!(
                "e1 via {} is {other}, via {} is {first}",
                r, routes[0].0
            )));
        }
        Ok(first.clone())
    }

    /// Brauer class of A, from the factors.
    pub fn brauer_class(&self) -> Result<BrauerClass, CsaError> {
        let mut c = BrauerClass::trivial();
        for f in &self.provenance().factors {
            if let Factor::Quaternion { algebra, .. } = f {
                c = c.add(&algebra.brauer_class()?);
            }
        }
        Ok(c)
    }

    /// Every available computation of e₂ as a pair {β, β + [A]}.
    pub fn e2_routes(&self) -> Result<Vec<(E2Route, E2Pair)>, CsaError> {
        if !self.e1()?.is_trivial() {
            return Err(CsaError::E1Nonzero);
        }
        let class_a = self.brauer_class()?;
        let mut out = Vec::new();
        if let Some(q) = split_form(self)? {
            let beta = q.invariants()?.clifford.clone();
            out.push((E2Route::Adjoint, E2Pair::new(beta, &class_a)));
        }
        let p = self.provenance();
        let quats: Option<Vec<_>> = p
            .factors
            .iter()
            .map(|f| match f {
                Factor::Quaternion { algebra, involution } => Some((algebra, involution)),
                Factor::SplitForm { .. } => None,
            })
            .collect();
        if let (Some(qs), None) = (quats, &p.twist) {
            let all_canonical = qs.iter().all(|(_, i)| **i == QuatInvolution::Canonical);
            match qs.len() {
                // C(A, σ) ≅ Q₁ × Q₂.
                2 if all_canonical => out.push((
                    E2Route::CanonicalPair,
                    E2Pair::new(qs[0].0.brauer_class()?, &class_a),
                )),
                // With sₜ = iₜ in a presentation (αₜ, βₜ), σ is canonical on the
                // commuting subalgebras ⟨i₁⊗1, j₁⊗i₂⟩ ≅ (α₁, α₂β₁) and
                // ⟨1⊗i₂, i₁⊗j₂⟩ ≅ (α₂, α₁β₂).
                2 => {
                    let squares: Vec<Rational> = qs
                        .iter()
                        .map(|(q, inv)| match inv {
                            QuatInvolution::Orthogonal(s) => {
                                let s = q.from_coords(s);
                                s.mul(&s).coords[0].clone()
                            }
                            QuatInvolution::Canonical => unreachable!("mixed pair is symplectic"),
                        })
                        .collect();
                    let beta = brauer_class_of_symbol(&squares[0], &squares[1])?.add(&qs[0].0.brauer_class()?);
                    out.push((E2Route::OrthogonalPair, E2Pair::new(beta, &class_a)));
                }
                // Products of three or more quaternions with involution are
                // Pfister algebras with involution, so one component splits.
                k if k >= 3 => out.push((
                    E2Route::QuaternionProduct,
                    E2Pair::new(BrauerClass::trivial(), &class_a),
                )),
                _ => {}
            }
        }
        Ok(out)
    }

    pub fn e2(&self) -> Result<E2Pair, CsaError> {
        let routes = self.e2_routes()?;
        let Some((_, first)) = routes.first() else {
            return Err(CsaError::Uncomputable(
                "e2 needs a split algebra or canonical factors".into(),
            ));
        };
        if let Some((r, other)) = routes.iter().find(|(_, c)| c != first) {
            return Err(CsaError::RouteMismatch(format!(
                "e2 via {} is {other}, via {} is {first}",
                r, routes[0].0
            )));
        }
        Ok(first.clone())
    }

    /// Pfister criterion by degree: 1 and 2 always, 4 needs e₁ = 0, 8 needs
    /// e₁ = e₂ = 0; other degrees that are not powers of two never qualify.
    pub fn is_pfister_involution(&self) -> Result<bool, CsaError> {
        if self.kind() != InvolutionType::Orthogonal {
            return Ok(false);
        }
        match self.degree()? {
            1 | 2 => Ok(true),
            d if !d.is_power_of_two() => Ok(false),
            4 => Ok(self.e1()?.is_trivial()),
            8 => {
                if !self.e1()?.is_trivial() {
                    return Ok(false);
                }
                Ok(self.e2()?.is_trivial())
            }
            d => Err(CsaError::UnsupportedDegree(d)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum E1Route {
    /// Discriminant of the adjoint form of a split algebra.
    Adjoint,
    /// Square class of s² for Int(s)∘γ on a quaternion algebra.
    PureSquare,
    /// Square class of Nrd(u) for Int(u)∘(γ₁⊗γ₂).
    ReducedNorm,
    /// Untwisted tensor of at least two even-degree factors.
    ProductRule,
}

impl fmt::Display for E1Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            E1Route::Adjoint => "adjoint form",
            E1Route::PureSquare => "square of s",
            E1Route::ReducedNorm => "reduced norm",
            E1Route::ProductRule => "product rule",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum E2Route {
    Adjoint,
    CanonicalPair,
    OrthogonalPair,
    QuaternionProduct,
}

impl fmt::Display for E2Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            E2Route::Adjoint => "adjoint form",
            E2Route::CanonicalPair => "canonical pair",
            E2Route::OrthogonalPair => "orthogonal pair",
            E2Route::QuaternionProduct => "quaternion product",
        };
        f.write_str(s)
    }
}

/// The unordered pair {β, β + [A]}, stored sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct E2Pair {
    pub first: BrauerClass,
    pub second: BrauerClass,
}

impl E2Pair {
    pub fn new(beta: BrauerClass, class_a: &BrauerClass) -> Self {
        let other = beta.add(class_a);
        let (first, second) = if beta <= other { (beta, other) } else { (other, beta) };
        E2Pair { first, second }
    }

    /// Zero lies in the pair.
    pub fn is_trivial(&self) -> bool {
        self.first.is_trivial() || self.second.is_trivial()
    }

    pub fn contains(&self, c: &BrauerClass) -> bool {
        self.first == *c || self.second == *c
    }
}

impl fmt::Display for E2Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}, {}}}", self.first, self.second)
    }
}
