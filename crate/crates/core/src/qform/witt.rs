//! Witt decomposition q ≅ m·H ⊥ q_an with explicit vectors.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::lattice::{find_isotropic, Lattice};
use super::{QformError, QuadraticForm};
use crate::arith::{serde_rational, Factorizer, Rational};
use crate::linalg::{self, Vector};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HyperbolicPair {
    #[serde(with = "serde_rational::vec")]
    pub u: Vector,
    #[serde(with = "serde_rational::vec")]
    pub v: Vector,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WittDecomposition {
    pub witt_index: usize,
    pub hyperbolic_basis: Vec<HyperbolicPair>,
    #[serde(with = "serde_rational::matrix")]
    pub anisotropic_basis: Vec<Vector>,
}

impl WittDecomposition {
    /// Checks every defining identity exactly against `q`.
    pub fn verify(&self, q: &QuadraticForm) -> Result<(), String> {
        if 2 * self.witt_index + self.anisotropic_basis.len() != q.dim() {
            return Err("dimension count 2·index + anisotropic ≠ dim".into());
        }
        if self.hyperbolic_basis.len() != self.witt_index {
            return Err("pair count differs from the Witt index".into());
        }
        let mut all: Vec<&Vector> = Vec::new();
        for (k, pair) in self.hyperbolic_basis.iter().enumerate() {
            if !q.eval(&pair.u).is_zero() || !q.eval(&pair.v).is_zero() {
                return Err(format!("pair {k} is not isotropic"));
            }
            if !q.polar(&pair.u, &pair.v).is_one() {
                return Err(format!("pair {k} has b(u, v) ≠ 1"));
            }
            for (l, other) in self.hyperbolic_basis.iter().enumerate().skip(k + 1) {
                for (x, y) in [(&pair.u, &other.u), (&pair.u, &other.v), (&pair.v, &other.u), (&pair.v, &other.v)] {
                    if !q.polar(x, y).is_zero() {
                        return Err(format!("pairs {k} and {l} are not orthogonal"));
                    }
                }
            }
            for a in &self.anisotropic_basis {
                if !q.polar(&pair.u, a).is_zero() || !q.polar(&pair.v, a).is_zero() {
                    return Err(format!("pair {k} is not orthogonal to the anisotropic block"));
                }
            }
            all.push(&pair.u);
            all.push(&pair.v);
        }
        all.extend(self.anisotropic_basis.iter());
        let vs: Vec<Vector> = all.into_iter().cloned().collect();
        if linalg::span_rank(&vs) != q.dim() {
            return Err("vectors do not form a basis".into());
        }
        if !self.anisotropic_basis.is_empty() {
            let an = q.restrict(&self.anisotropic_basis).map_err(|e| e.to_string())?;
            if an.decide_isotropic().map_err(|e| e.to_string())? {
                return Err("residual form is isotropic".into());
            }
        }
        Ok(())
    }

    /// A maximal totally isotropic subspace spanned by the u-vectors.
    pub fn lagrangian(&self) -> Vec<Vector> {
        self.hyperbolic_basis.iter().map(|p| p.u.clone()).collect()
    }
}

/// Extended gcd over a vector: returns (g, w) with Σ wᵢaᵢ = g ≥ 0.
fn vector_egcd(a: &[BigInt]) -> (BigInt, Vec<BigInt>) {
    let mut g = BigInt::zero();
    let mut w = vec![BigInt::zero(); a.len()];
    for (i, ai) in a.iter().enumerate() {
        let e = g.extended_gcd(ai);
        for wj in w.iter_mut().take(i) {
            *wj *= &e.x;
        }
        w[i] = e.y;
        g = e.gcd;
    }
    if g < BigInt::zero() {
        g = -g;
        for x in w.iter_mut() {
            *x = -&*x;
        }
    }
    (g, w)
}

fn int_mat_vec(g: &[Vec<BigInt>], v: &[BigInt]) -> Vec<BigInt> {
    g.iter().map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

fn int_dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(super) fn decompose(q: &QuadraticForm, ceiling: u64) -> Result<WittDecomposition, QformError> {
    let mut hint: Vec<BigUint> = q.finite_primes()?;
    let f = Factorizer::default();
    let mut lat = Lattice::from_gram(q.gram());
    {
        let det = lat.det();
        hint = f.prime_divisors_with_hint(det.magnitude(), &hint)?;
        lat.minimize(&hint);
        lat.lll();
    }
    let mut pairs = Vec::new();
    while lat.dim() >= 2 {
        let sub = QuadraticForm::with_prime_hint(lat.gram_matrix(), hint.clone())?;
        if !sub.decide_isotropic()? {
            break;
        }
        let y = find_isotropic(&lat.gram_matrix(), &hint, ceiling)?;
        let v = linalg::primitive_integer_vector(&y);
        let gv = int_mat_vec(&lat.gram, &v);
        let (g, w) = vector_egcd(&gv);
        let gw = int_mat_vec(&lat.gram, &w);
        let c = int_dot(&w, &gw);
        // In lattice coordinates: b(v, w) = g and q(w) = c, so (v, (w − c/(2g)·v)/g)
        // is a hyperbolic pair for the scaled form.
        let gr = Rational::from_integer(g.clone());
        let vr = linalg::to_rational_vec(&v);
        let shift = Rational::from_integer(c) / (Rational::from_integer(BigInt::from(2)) * &gr);
        let wr = linalg::vec_scale(
            &linalg::vec_sub(&linalg::to_rational_vec(&w), &linalg::vec_scale(&vr, &shift)),
            &gr.recip(),
        );
        // Undo the lattice scaling so that b(u, v) = 1 for the original form.
        let u_amb = lat.to_ambient(&vr);
        let v_amb = linalg::vec_scale(&lat.to_ambient(&wr), &lat.scale);
        pairs.push(HyperbolicPair { u: u_amb, v: v_amb });
        if lat.dim() == 2 {
            lat = Lattice {
                basis: crate::linalg::Matrix::zeros(q.dim(), 0),
                gram: Vec::new(),
                scale: lat.scale.clone(),
            };
            break;
        }
        // Complement L ∩ ⟨v, w⟩^⊥ as an integer kernel.
        let kernel = linalg::integer_kernel(&[gv, gw], lat.dim());
        lat = lat.sublattice(&kernel);
        if !g.is_one() {
            let extra = f.prime_divisors(g.magnitude())?;
            hint.extend(extra);
            hint.sort();
            hint.dedup();
        }
        lat.minimize(&hint);
        lat.lll();
    }
    let anisotropic_basis: Vec<Vector> = (0..lat.dim()).map(|j| lat.basis.col(j)).collect();
    Ok(WittDecomposition {
        witt_index: pairs.len(),
        hyperbolic_basis: pairs,
        anisotropic_basis,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::int;
    use crate::linalg::Matrix;
    use crate::qform::pfister;

    fn diag(xs: &[i64]) -> QuadraticForm {
        QuadraticForm::diagonal_i64(xs).unwrap()
    }

    #[test]
    fn hyperbolic_plane_has_index_one() {
        let q = diag(&[1, -1]);
        let w = q.witt_decompose().unwrap();
        assert_eq!(w.witt_index, 1);
        assert!(w.anisotropic_basis.is_empty());
        w.verify(&q).unwrap();
    }

    #[test]
    fn definite_form_has_index_zero() {
        let q = diag(&[1, 1, 1, 1]);
        let w = q.witt_decompose().unwrap();
        assert_eq!(w.witt_index, 0);
        assert_eq!(w.anisotropic_basis.len(), 4);
        w.verify(&q).unwrap();
    }

    #[test]
    fn isotropic_pfister_form_is_hyperbolic() {
        let q = pfister(&[int(1), int(6)]).unwrap();
        let w = q.witt_decompose().unwrap();
        assert_eq!(w.witt_index, 2);
        w.verify(&q).unwrap();
    }

    #[test]
    fn mixed_form() {
        // 2H ⊥ ⟨1,1,3⟩ in a skewed basis.
        let base = diag(&[1, -1, 5, -5, 1, 1, 3]);
        let mut p = Matrix::identity(7);
        for i in 0..7 {
            for j in i + 1..7 {
                p[(i, j)] = int(((3 * i + 5 * j) % 7) as i64 - 3);
            }
        }
        let q = base.transform(&p).unwrap();
        let w = q.witt_decompose().unwrap();
        assert_eq!(w.witt_index, 2);
        w.verify(&q).unwrap();
    }

    #[test]
    fn vector_egcd_combination() {
        let a = vec![BigInt::from(6), BigInt::from(-10), BigInt::from(15)];
        let (g, w) = vector_egcd(&a);
        assert_eq!(g, BigInt::one());
        assert_eq!(int_dot(&a, &w), g);
    }
}
