//! Clifford algebras of diagonalized forms on monomials e_S, S ⊆ {1..n}.

use num_traits::{One, Zero};

use super::{CsaError, StructureAlgebra};
use crate::arith::{brauer_class_of_symbol, BrauerClass, Rational};
use crate::qform::QuadraticForm;

/// Largest form dimension accepted (2ⁿ basis elements, 4ⁿ table entries).
pub const MAX_CLIFFORD_DIM: usize = 6;

#[derive(Debug, Clone)]
pub struct CliffordAlgebra {
    /// Diagonal entries a₁, …, aₙ of the form with eᵢ² = aᵢ.
    pub diagonal: Vec<Rational>,
    /// Full algebra on monomials; e_S has index equal to the bitmask of S.
    pub algebra: StructureAlgebra,
}

/// e_S·e_T = sign·∏_{i∈S∩T} aᵢ · e_{S△T}.
fn monomial_product(a: &[Rational], s: usize, t: usize) -> Rational {
    // Each generator in T moves left past the generators of S with larger index.
    let mut swaps = 0u32;
    for j in 0..a.len() {
        if t >> j & 1 == 1 {
            swaps += (s >> (j + 1)).count_ones();
        }
    }
    let mut c = if swaps % 2 == 0 { Rational::one() } else { -Rational::one() };
    for (i, ai) in a.iter().enumerate() {
        if (s & t) >> i & 1 == 1 {
            c *= ai;
        }
    }
    c
}

fn monomial_label(s: usize, n: usize) -> String {
    if s == 0 {
        return "1".into();
    }
    (0..n).filter(|i| s >> i & 1 == 1).map(|i| format!("e{}", i + 1)).collect()
}

pub fn clifford_algebra(q: &QuadraticForm) -> Result<CliffordAlgebra, CsaError> {
    let n = q.dim();
    if n > MAX_CLIFFORD_DIM {
        return Err(CsaError::DimensionGuard(n));
    }
    let a = q.diagonal_entries().to_vec();
    let size = 1usize << n;
    let labels = (0..size).map(|s| monomial_label(s, n)).collect();
    let mut table = Vec::with_capacity(size * size);
    for s in 0..size {
        for t in 0..size {
            table.push(vec![(s ^ t, monomial_product(&a, s, t))]);
        }
    }
    let mut unit = vec![Rational::zero(); size];
    unit[0] = Rational::one();
    Ok(CliffordAlgebra {
        diagonal: a,
        algebra: StructureAlgebra::from_sparse(labels, table, unit),
    })
}

impl CliffordAlgebra {
    pub fn form_dim(&self) -> usize {
        self.diagonal.len()
    }

    fn even_masks(&self) -> Vec<usize> {
        (0..1usize << self.form_dim()).filter(|s| s.count_ones() % 2 == 0).collect()
    }

    /// C₀(q) on the even monomials, re-indexed in increasing bitmask order.
    pub fn even_part(&self) -> StructureAlgebra {
        let masks = self.even_masks();
        let index = |m: usize| masks.iter().position(|&x| x == m).expect("even mask");
        let labels = masks.iter().map(|&s| self.algebra.labels()[s].clone()).collect();
        let mut table = Vec::with_capacity(masks.len() * masks.len());
        for &s in &masks {
            for &t in &masks {
                table.push(vec![(index(s ^ t), monomial_product(&self.diagonal, s, t))]);
            }
        }
        let mut unit = vec![Rational::zero(); masks.len()];
        unit[0] = Rational::one();
        StructureAlgebra::from_sparse(labels, table, unit)
    }

    fn square(&self, s: usize) -> Rational {
        monomial_product(&self.diagonal, s, s)
    }

    fn commute(&self, s: usize, t: usize) -> bool {
        monomial_product(&self.diagonal, s, t) == monomial_product(&self.diagonal, t, s)
    }

    /// Brauer class of C(q) for even n and of C₀(q) for odd n, read off a
    /// decomposition into quaternion subalgebras generated by anticommuting
    /// monomial pairs. Each pair (u, v) spans (u², v²), and its centralizer is
    /// again spanned by the monomials commuting with both.
    pub fn brauer_class(&self) -> Result<BrauerClass, CsaError> {
        let n = self.form_dim();
        let mut pool: Vec<usize> = if n % 2 == 0 {
            (1..1usize << n).collect()
        } else {
            self.even_masks().into_iter().filter(|&s| s != 0).collect()
        };
        let target = if n % 2 == 0 { n / 2 } else { (n - 1) / 2 };
        let mut class = BrauerClass::trivial();
        for _ in 0..target {
            let pair = pool.iter().find_map(|&u| {
                pool.iter()
                    .find(|&&v| !self.commute(u, v))
                    .map(|&v| (u, v))
            });
            let Some((u, v)) = pair else {
                return Err(CsaError::Uncomputable("monomial algebra is not central simple".into()));
            };
            class = class.add(&brauer_class_of_symbol(&self.square(u), &self.square(v))?);
            pool.retain(|&w| self.commute(w, u) && self.commute(w, v));
        }
        Ok(class)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::int;

    fn diag(xs: &[i64]) -> QuadraticForm {
        QuadraticForm::diagonal_i64(xs).unwrap()
    }

    #[test]
    fn one_dimensional() {
        let c = clifford_algebra(&diag(&[5])).unwrap();
        c.algebra.validate().unwrap();
        assert_eq!(c.algebra.product(1, 1), &[(0, int(5))]);
        assert!(c.brauer_class().unwrap().is_trivial());
    }

    #[test]
    fn binary_form_gives_quaternion_algebra() {
        let c = clifford_algebra(&diag(&[-1, -1])).unwrap();
        c.algebra.validate().unwrap();
        // e1·e2 = −e2·e1
        assert_eq!(c.algebra.product(1, 2), &[(3, int(1))]);
        assert_eq!(c.algebra.product(2, 1), &[(3, int(-1))]);
        assert_eq!(
            c.brauer_class().unwrap(),
            brauer_class_of_symbol(&int(-1), &int(-1)).unwrap()
        );
    }

    #[test]
    fn even_part_of_ternary() {
        let c = clifford_algebra(&diag(&[1, 1, 1])).unwrap();
        let c0 = c.even_part();
        assert_eq!(c0.dim(), 4);
        c0.validate().unwrap();
        assert_eq!(
            c.brauer_class().unwrap(),
            brauer_class_of_symbol(&int(-1), &int(-1)).unwrap()
        );
    }

    #[test]
    fn agrees_with_hasse_formula() {
        let forms: [&[i64]; 8] = [
            &[1, 2],
            &[3, -5],
            &[2, 3, 7],
            &[-1, -1, -1],
            &[1, 1, 1, 1],
            &[2, 3, 5, -7],
            &[1, -3, 5, 7, 11],
            &[-2, 3, -5, 6, 7, -1],
        ];
        for f in forms {
            let q = diag(f);
            let c = clifford_algebra(&q).unwrap();
            assert_eq!(
                c.brauer_class().unwrap(),
                q.invariants().unwrap().clifford,
                "form {f:?}"
            );
        }
    }

    #[test]
    fn dimension_guard() {
        assert!(matches!(
            clifford_algebra(&diag(&[1; 7])),
            Err(CsaError::DimensionGuard(7))
        ));
    }

    #[test]
    fn four_dimensional_table_is_associative() {
        let c = clifford_algebra(&diag(&[2, -3, 5, 7])).unwrap();
        c.algebra.validate().unwrap();
    }
}
