//! Integral lattices carrying a quadratic form, used to find isotropic vectors.
//!
//! A plain box search on a large indefinite Gram matrix is hopeless, so the
//! witness finder first shrinks the determinant by p-minimization, then runs an
//! LLL reduction adapted to indefinite forms (an exact zero often falls out of
//! Gram-Schmidt directly), and only then searches a small box on the
//! Gram-Schmidt diagonal.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{QformError, QuadraticForm};
use crate::arith::{exact_sqrt, is_probable_prime, local, square_class, Factorizer, Rational};
use crate::linalg::{self, Matrix, Vector};

/// A full-rank lattice in ℚⁿ with an integral Gram matrix.
///
/// `basis` holds the lattice basis as columns in the ambient coordinates, and
/// `gram = scale · basisᵀ · G₀ · basis` for the ambient Gram matrix G₀.
#[derive(Debug, Clone)]
pub struct Lattice {
    pub basis: Matrix,
    pub gram: Vec<Vec<BigInt>>,
    pub scale: Rational,
}

fn to_int(x: &Rational) -> BigInt {
    assert!(x.is_integer(), "expected an integral Gram entry");
    x.to_integer()
}

fn int_gram(m: &Matrix) -> Vec<Vec<BigInt>> {
    (0..m.rows())
        .map(|i| m.row(i).iter().map(to_int).collect())
        .collect()
}

fn rat_gram(g: &[Vec<BigInt>]) -> Matrix {
    Matrix::from_rows(
        g.iter()
            .map(|r| r.iter().map(|x| Rational::from_integer(x.clone())).collect())
            .collect(),
    )
}

fn big(p: &BigUint) -> BigInt {
    BigInt::from_biguint(Sign::Plus, p.clone())
}

impl Lattice {
    /// The standard lattice ℤⁿ with the Gram matrix scaled to be primitive integral.
    pub fn from_gram(g0: &Matrix) -> Lattice {
        let n = g0.rows();
        let entries: Vec<Rational> = (0..n).flat_map(|i| g0.row(i).to_vec()).collect();
        let d = linalg::common_denominator(&entries);
        let scaled = g0.scale(&Rational::from_integer(d.clone()));
        let mut lat = Lattice {
            basis: Matrix::identity(n),
            gram: int_gram(&scaled),
            scale: Rational::from_integer(d),
        };
        lat.make_primitive();
        lat
    }

    /// A sublattice given by integer coordinate vectors relative to this one.
    pub fn sublattice(&self, cols: &[Vec<BigInt>]) -> Lattice {
        let t = Matrix::from_cols(&cols.iter().map(|c| linalg::to_rational_vec(c)).collect::<Vec<_>>());
        let mut lat = Lattice {
            basis: self.basis.mul(&t),
            gram: int_gram(&rat_gram(&self.gram).congruence(&t)),
            scale: self.scale.clone(),
        };
        lat.make_primitive();
        lat
    }

    pub fn dim(&self) -> usize {
        self.gram.len()
    }

    pub fn det(&self) -> BigInt {
        to_int(&rat_gram(&self.gram).det())
    }

    pub fn gram_matrix(&self) -> Matrix {
        rat_gram(&self.gram)
    }

    /// Ambient coordinates of a vector given in lattice coordinates.
    pub fn to_ambient(&self, y: &[Rational]) -> Vector {
        self.basis.mul_vec(y)
    }

    fn make_primitive(&mut self) {
        let g = self
            .gram
            .iter()
            .flatten()
            .fold(BigInt::zero(), |acc, x| acc.gcd(x));
        if g > BigInt::one() {
            for x in self.gram.iter_mut().flatten() {
                *x /= &g;
            }
            self.scale /= Rational::from_integer(g);
        }
    }

    /// Replaces the basis by basis·T (T rational, change of lattice), dividing
    /// the resulting Gram matrix by `div`.
    fn apply(&mut self, t: &Matrix, div: &BigInt) {
        let g = rat_gram(&self.gram).congruence(t);
        let dr = Rational::from_integer(div.clone());
        self.gram = int_gram(&g.scale(&dr.recip()));
        self.basis = self.basis.mul(t);
        self.scale /= dr;
        self.make_primitive();
    }

    /// Reduces the determinant by the primes in `primes` as far as local
    /// maximality allows.
    pub fn minimize(&mut self, primes: &[BigUint]) {
        for p in primes {
            let mut steps = 0;
            while self.reduce_at(p) {
                steps += 1;
                if steps % 4 == 0 {
                    // Keep entries small while walking down a high power of p.
                    self.lll();
                }
            }
        }
    }

    /// One minimization step at p. Returns false when the lattice is
    /// p-maximal for this procedure.
    fn reduce_at(&mut self, p: &BigUint) -> bool {
        let n = self.dim();
        let pb = big(p);
        let det = self.det();
        if !(&det % &pb).is_zero() {
            return false;
        }
        let gm: Vec<Vec<BigInt>> = self
            .gram
            .iter()
            .map(|r| r.iter().map(|x| x.mod_floor(&pb)).collect())
            .collect();
        let (kernel, free) = nullspace_mod_p(&gm, &pb);
        let k = kernel.len();
        if k == 0 {
            return false;
        }
        if 2 * k > n {
            // M = {x : Gx ≡ 0 mod p}; b(M, M) ⊆ pℤ and det(M/p) = det·p^{n−2k}.
            let mut cols: Vec<Vector> = kernel.iter().map(|v| linalg::to_rational_vec(v)).collect();
            for j in 0..n {
                if !free.contains(&j) {
                    let mut e = vec![Rational::zero(); n];
                    e[j] = Rational::from_integer(pb.clone());
                    cols.push(e);
                }
            }
            self.apply(&Matrix::from_cols(&cols), &pb);
            return true;
        }
        if (&det % (&pb * &pb)).is_zero() {
            if let Some(v) = self.isotropic_in_kernel(&kernel, &pb) {
                // L + ℤ·v/p is still integral and has determinant det/p².
                let j = (0..n).find(|&j| !(&v[j] % &pb).is_zero()).expect("v ≠ 0 mod p");
                let inv = local::inverse_mod(&v[j], p).expect("unit");
                let v: Vec<BigInt> = v.iter().map(|x| (x * &inv).mod_floor(&pb)).collect();
                let mut t = Matrix::identity(n);
                for (i, x) in v.iter().enumerate() {
                    t[(i, j)] = Rational::new(x.clone(), pb.clone());
                }
                self.apply(&t, &BigInt::one());
                return true;
            }
        }
        false
    }

    /// A vector v in the kernel of G mod p with q(v) ≡ 0 mod p².
    fn isotropic_in_kernel(&self, kernel: &[Vec<BigInt>], p: &BigInt) -> Option<Vec<BigInt>> {
        let q = |v: &[BigInt]| -> BigInt {
            let gv: Vec<BigInt> = self
                .gram
                .iter()
                .map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum())
                .collect();
            v.iter().zip(&gv).map(|(a, b)| a * b).sum()
        };
        let combine = |coef: &[BigInt]| -> Vec<BigInt> {
            let n = self.dim();
            let mut v = vec![BigInt::zero(); n];
            for (c, k) in coef.iter().zip(kernel) {
                for (vi, ki) in v.iter_mut().zip(k) {
                    *vi += c * ki;
                }
            }
            v
        };
        let k = kernel.len();
        let two = BigInt::from(2);
        if *p == two {
            // q/2 mod 2 is additive on the kernel, so find a zero of a linear form.
            let ell: Vec<bool> = kernel
                .iter()
                .map(|v| !((q(v) / &two) % &two).is_zero())
                .collect();
            if let Some(i) = ell.iter().position(|&b| !b) {
                return Some(kernel[i].clone());
            }
            if k >= 2 {
                let mut coef = vec![BigInt::zero(); k];
                coef[0] = BigInt::one();
                coef[1] = BigInt::one();
                return Some(combine(&coef));
            }
            return None;
        }
        // Odd p: diagonalize Q̄(t) = q(Σ tᵢκᵢ)/p over F_p.
        let pp = p * p;
        let mut b = vec![vec![BigInt::zero(); k]; k];
        for i in 0..k {
            for j in 0..k {
                let bij: BigInt = {
                    let gv: Vec<BigInt> = self
                        .gram
                        .iter()
                        .map(|r| r.iter().zip(&kernel[j]).map(|(a, c)| a * c).sum())
                        .collect();
                    kernel[i].iter().zip(&gv).map(|(a, c)| a * c).sum()
                };
                b[i][j] = (bij / p).mod_floor(p);
            }
        }
        let t = isotropic_mod_p(&b, p)?;
        let v = combine(&t);
        debug_assert!((q(&v) % &pp).is_zero());
        Some(v)
    }

    /// LLL reduction for a possibly indefinite integral Gram matrix, following
    /// the integral variant of the algorithm with |·| in the exchange test.
    /// Returns an isotropic vector (lattice coordinates) if one of the
    /// Gram-Schmidt norms vanishes along the way.
    pub fn lll(&mut self) -> Option<Vector> {
        let n = self.dim();
        if n == 0 {
            return None;
        }
        let mut g = self.gram.clone();
        let mut t: Vec<Vec<BigInt>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
            .collect();
        let result = lll_core(&mut g, &mut t);
        // t holds the new basis vectors as rows in old lattice coordinates.
        let tm = Matrix::from_cols(&t.iter().map(|r| linalg::to_rational_vec(r)).collect::<Vec<_>>());
        self.basis = self.basis.mul(&tm);
        self.gram = g;
        result.map(|j| self.gram_schmidt_isotropic(j))
    }

    /// The Gram-Schmidt vector b*_j (lattice coordinates), assuming the
    /// leading j×j block is non-degenerate.
    fn gram_schmidt_isotropic(&self, j: usize) -> Vector {
        let n = self.dim();
        let mut y = vec![Rational::zero(); n];
        y[j] = Rational::one();
        if j > 0 {
            let g = self.gram_matrix();
            let lead = Matrix::from_rows((0..j).map(|r| g.row(r)[..j].to_vec()).collect());
            let rhs: Vec<Rational> = (0..j).map(|r| g[(r, j)].clone()).collect();
            let c = lead.solve(&rhs).expect("leading block invertible");
            for (i, ci) in c.iter().enumerate() {
                y[i] = -ci.clone();
            }
        }
        y
    }

    /// Gram-Schmidt basis (rows, lattice coordinates) and diagonal, if no
    /// leading minor vanishes.
    fn gram_schmidt(&self) -> Option<(Vec<Vector>, Vec<Rational>)> {
        let n = self.dim();
        let g = self.gram_matrix();
        let mut stars: Vec<Vector> = Vec::with_capacity(n);
        let mut norms: Vec<Rational> = Vec::with_capacity(n);
        for j in 0..n {
            let mut v = linalg::unit_vector(n, j);
            for i in 0..j {
                let mu = linalg::bilinear(&g, &linalg::unit_vector(n, j), &stars[i]) / &norms[i];
                v = linalg::vec_sub(&v, &linalg::vec_scale(&stars[i], &mu));
            }
            let nv = linalg::bilinear(&g, &v, &v);
            if nv.is_zero() {
                return None;
            }
            stars.push(v);
            norms.push(nv);
        }
        Some((stars, norms))
    }
}

/// Nearest integer to a/b (ties toward +∞).
fn round_div(a: &BigInt, b: &BigInt) -> BigInt {
    let two = BigInt::from(2);
    let (num, den) = if b.is_negative() { (-a, -b) } else { (a.clone(), b.clone()) };
    (two * num + &den).div_floor(&(BigInt::from(2) * den))
}

/// Core of the integral LLL on Gram matrix `g` with transform rows `t`.
/// Returns Some(j) if the j-th Gram-Schmidt norm (0-based) vanishes.
fn lll_core(g: &mut [Vec<BigInt>], t: &mut [Vec<BigInt>]) -> Option<usize> {
    let n = g.len();
    // 1-based arrays as in the textbook formulation.
    let mut d = vec![BigInt::zero(); n + 1];
    let mut lam = vec![vec![BigInt::zero(); n + 1]; n + 1];
    d[0] = BigInt::one();
    d[1] = g[0][0].clone();
    if d[1].is_zero() {
        return Some(0);
    }
    if n == 1 {
        return None;
    }
    let (c_num, c_den) = (BigInt::from(99), BigInt::from(100));
    let mut k = 2usize;
    let mut kmax = 1usize;

    let red = |k: usize,
               l: usize,
               g: &mut [Vec<BigInt>],
               t: &mut [Vec<BigInt>],
               lam: &mut Vec<Vec<BigInt>>,
               d: &[BigInt]| {
        if BigInt::from(2) * lam[k][l].abs() > d[l].abs() {
            let q = round_div(&lam[k][l], &d[l]);
            if q.is_zero() {
                return;
            }
            sub_basis(g, t, k - 1, l - 1, &q);
            let dl = d[l].clone();
            lam[k][l] -= &q * dl;
            for i in 1..l {
                let v = &q * &lam[l][i];
                lam[k][i] -= v;
            }
        }
    };

    loop {
        if k > kmax {
            kmax = k;
            for j in 1..=k {
                let mut u = g[k - 1][j - 1].clone();
                for i in 1..j {
                    u = (&d[i] * &u - &lam[k][i] * &lam[j][i]) / &d[i - 1];
                }
                if j < k {
                    lam[k][j] = u;
                } else {
                    if u.is_zero() {
                        return Some(k - 1);
                    }
                    d[k] = u;
                }
            }
        }
        red(k, k - 1, g, t, &mut lam, &d);
        let l = lam[k][k - 1].clone();
        let b = (&d[k] * &d[k - 2] + &l * &l) / &d[k - 1];
        if &c_den * b.abs() < &c_num * d[k - 1].abs() {
            // Exchange b_k and b_{k-1}.
            swap_basis(g, t, k - 1, k - 2);
            for j in 1..k - 1 {
                let tmp = lam[k][j].clone();
                lam[k][j] = lam[k - 1][j].clone();
                lam[k - 1][j] = tmp;
            }
            if b.is_zero() {
                return Some(k - 2);
            }
            for i in k + 1..=kmax {
                let tt = lam[i][k].clone();
                lam[i][k] = (&d[k] * &lam[i][k - 1] - &l * &tt) / &d[k - 1];
                lam[i][k - 1] = (&b * &tt + &l * &lam[i][k]) / &d[k];
            }
            d[k - 1] = b;
            k = (k - 1).max(2);
        } else {
            for l in (1..k - 1).rev() {
                red(k, l, g, t, &mut lam, &d);
            }
            k += 1;
            if k > n {
                return None;
            }
        }
    }
}

/// b_k ← b_k − q·b_l.
fn sub_basis(g: &mut [Vec<BigInt>], t: &mut [Vec<BigInt>], k: usize, l: usize, q: &BigInt) {
    let n = g.len();
    let rl = t[l].clone();
    for (x, y) in t[k].iter_mut().zip(&rl) {
        *x -= q * y;
    }
    let gl = g[l].clone();
    for c in 0..n {
        g[k][c] -= q * &gl[c];
    }
    for r in 0..n {
        let v = q * &g[r][l];
        g[r][k] -= v;
    }
}

fn swap_basis(g: &mut [Vec<BigInt>], t: &mut [Vec<BigInt>], a: usize, b: usize) {
    t.swap(a, b);
    g.swap(a, b);
    for row in g.iter_mut() {
        row.swap(a, b);
    }
}

/// Nullspace of an integer matrix modulo p: basis vectors with entries in
/// [0, p) and the free columns where each has its unit entry.
fn nullspace_mod_p(m: &[Vec<BigInt>], p: &BigInt) -> (Vec<Vec<BigInt>>, Vec<usize>) {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut a: Vec<Vec<BigInt>> = m.to_vec();
    let pu = p.magnitude();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(piv) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, piv);
        let inv = local::inverse_mod(&a[r][c], pu).expect("prime modulus");
        for x in a[r].iter_mut() {
            *x = (&*x * &inv).mod_floor(p);
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                let pr = a[r].clone();
                for (x, y) in a[i].iter_mut().zip(&pr) {
                    *x = (&*x - &f * y).mod_floor(p);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    let basis = free
        .iter()
        .map(|&f| {
            let mut v = vec![BigInt::zero(); cols];
            v[f] = BigInt::one();
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = (-&a[i][f]).mod_floor(p);
            }
            v
        })
        .collect();
    (basis, free)
}

/// A nonzero t ∈ F_p^k with tᵀBt = 0 for the symmetric matrix B (p odd).
fn isotropic_mod_p(b: &[Vec<BigInt>], p: &BigInt) -> Option<Vec<BigInt>> {
    let k = b.len();
    let pu = p.magnitude();
    let md = |x: BigInt| x.mod_floor(p);
    let mut a: Vec<Vec<BigInt>> = b.to_vec();
    // Columns of `basis` track the change of coordinates.
    let mut basis: Vec<Vec<BigInt>> = (0..k)
        .map(|i| (0..k).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();
    let add = |a: &mut Vec<Vec<BigInt>>, basis: &mut Vec<Vec<BigInt>>, i: usize, j: usize, f: &BigInt| {
        // e_i ← e_i + f·e_j
        for c in 0..k {
            let v = f * &a[j][c];
            a[i][c] = md(&a[i][c] + v);
        }
        for r in 0..k {
            let v = f * &a[r][j];
            a[r][i] = md(&a[r][i] + v);
        }
        for r in 0..k {
            let v = f * &basis[r][j];
            basis[r][i] = md(&basis[r][i] + v);
        }
    };
    for i in 0..k {
        if a[i][i].is_zero() {
            // The current i-th basis vector is already isotropic.
            return Some((0..k).map(|r| basis[r][i].clone()).collect());
        }
        let inv = local::inverse_mod(&a[i][i], pu).expect("unit");
        for j in i + 1..k {
            if a[i][j].is_zero() {
                continue;
            }
            let f = md(-(&a[i][j] * &inv));
            add(&mut a, &mut basis, j, i, &f);
        }
    }
    let d: Vec<BigInt> = (0..k).map(|i| a[i][i].clone()).collect();
    let col = |coef: &[(usize, BigInt)]| -> Vec<BigInt> {
        (0..k)
            .map(|r| md(coef.iter().map(|(c, x)| x * &basis[r][*c]).sum()))
            .collect()
    };
    // Pairs: d_i x² + d_j = 0.
    for i in 0..k {
        for j in i + 1..k {
            let inv = local::inverse_mod(&d[i], pu).expect("unit");
            let r = md(-(&d[j] * inv));
            if let Some(x) = local::sqrt_mod_prime(r.magnitude(), pu) {
                return Some(col(&[(i, BigInt::from(x)), (j, BigInt::one())]));
            }
        }
    }
    if k >= 3 {
        let inv2 = local::inverse_mod(&d[1], pu).expect("unit");
        let mut x = BigInt::zero();
        while &x < p {
            let r = md(-(&d[2] + &d[0] * &x * &x) * &inv2);
            if let Some(y) = local::sqrt_mod_prime(r.magnitude(), pu) {
                return Some(col(&[(0, x), (1, BigInt::from(y)), (2, BigInt::one())]));
            }
            x += 1;
        }
    }
    None
}

/// Finds an isotropic vector of the form with Gram matrix `g0`, known to be
/// isotropic, within the given number of search candidates.
pub fn find_isotropic(g0: &Matrix, prime_hint: &[BigUint], ceiling: u64) -> Result<Vector, QformError> {
    let n = g0.rows();
    for i in 0..n {
        if g0[(i, i)].is_zero() {
            return Ok(linalg::unit_vector(n, i));
        }
    }
    let mut lat = Lattice::from_gram(g0);
    let det = lat.det();
    if let Some(y) = lat.lll() {
        return Ok(lat.to_ambient(&y));
    }
    if n == 3 {
        let y = super::legendre::isotropic_ternary(&lat.gram_matrix())?
            .ok_or_else(|| QformError::Unsupported("ternary form has no rational zero".into()))?;
        return Ok(lat.to_ambient(&y));
    }
    if n >= 5 {
        let y = split_diagonal(&lat.gram_matrix(), ceiling)?;
        return Ok(lat.to_ambient(&y));
    }
    let primes = Factorizer::default().prime_divisors_with_hint(det.magnitude(), prime_hint)?;
    lat.minimize(&primes);
    if let Some(y) = lat.lll() {
        return Ok(lat.to_ambient(&y));
    }
    if n == 4 {
        let y = split_diagonal(&lat.gram_matrix(), ceiling)?;
        return Ok(lat.to_ambient(&y));
    }
    let (stars, norms) = match lat.gram_schmidt() {
        Some(x) => x,
        None => unreachable!("lll returns isotropic Gram-Schmidt vectors"),
    };
    let y = diagonal_search(&norms, ceiling)?;
    let mut v = vec![Rational::zero(); n];
    for (yi, s) in y.iter().zip(&stars) {
        if !yi.is_zero() {
            v = linalg::vec_add(&v, &linalg::vec_scale(s, yi));
        }
    }
    let x = lat.to_ambient(&v);
    debug_assert!(linalg::bilinear(g0, &x, &x).is_zero());
    Ok(x)
}

/// Up to this many bad primes, every signed product of them is tried as t.
const SUBSET_PRIMES: usize = 12;

/// Dimension ≥ 4: diagonalize, take four or five entries with a > 0 > b first,
/// split them as ⟨a, b⟩ ⊥ ⟨rest⟩ and look for t such that ⟨a, b, t⟩ and
/// ⟨rest, −t⟩ are both isotropic. Zeros of the two smaller forms then glue.
fn split_diagonal(g0: &Matrix, ceiling: u64) -> Result<Vector, QformError> {
    let n = g0.rows();
    let diag = super::diagonalize_gram(g0);
    if let Some(i) = diag.entries.iter().position(|x| x.is_zero()) {
        return Ok(diag.basis.col(i));
    }
    let pos = diag.entries.iter().position(|x| x.is_positive());
    let neg = diag.entries.iter().position(|x| x.is_negative());
    let (Some(pos), Some(neg)) = (pos, neg) else {
        return Err(QformError::SearchCeiling(ceiling));
    };
    let mut idx = vec![pos, neg];
    idx.extend((0..n).filter(|&i| i != pos && i != neg).take(3));
    let m = idx.len();
    // dᵢ = sᵢ·rᵢ² with sᵢ squarefree; the form in yᵢ = rᵢ·zᵢ is diagonal in sᵢ.
    let mut s = Vec::with_capacity(m);
    let mut r = Vec::with_capacity(m);
    for &i in &idx {
        let d = &diag.entries[i];
        let sc = square_class(d)?.to_rational();
        r.push(rational_sqrt(&(d / &sc)).expect("d / squarefree part is a square"));
        s.push(sc);
    }
    let glue = |y: &[Rational], from: usize| -> Vector {
        let mut z = vec![Rational::zero(); n];
        for (k, yk) in y.iter().enumerate() {
            z[idx[from + k]] = yk / &r[from + k];
        }
        diag.basis.mul_vec(&z)
    };
    let small = |entries: Vec<Rational>| -> Result<Option<QuadraticForm>, QformError> {
        let q = QuadraticForm::diagonal(&entries)?;
        Ok(q.decide_isotropic()?.then_some(q))
    };
    let attempt = |t: &BigInt| -> Result<Option<Vector>, QformError> {
        let t = Rational::from_integer(t.clone());
        let Some(left) = small(vec![s[0].clone(), s[1].clone(), t.clone()])? else {
            return Ok(None);
        };
        let mut rest = s[2..].to_vec();
        rest.push(-t);
        let Some(right) = small(rest)? else {
            return Ok(None);
        };
        let x = find_isotropic(left.gram(), &[], ceiling)?;
        if x[2].is_zero() {
            return Ok(Some(glue(&x[..2], 0)));
        }
        let y = find_isotropic(right.gram(), &[], ceiling)?;
        let last = m - 2;
        if y[last].is_zero() {
            return Ok(Some(glue(&y[..last], 2)));
        }
        let mut v: Vec<Rational> = x[..2].iter().map(|c| c / &x[2]).collect();
        v.extend(y[..last].iter().map(|c| c / &y[last]));
        Ok(Some(glue(&v, 0)))
    };
    // t = ε·Π(A)·k with A a set of bad primes and k a prime outside them.
    // Local conditions at the bad places fix ε, A and the residue pattern of
    // k; by reciprocity the place k then takes care of itself.
    let ints: Vec<BigInt> = s.iter().map(|x| x.to_integer()).collect();
    let mut bad: Vec<BigUint> = vec![BigUint::from(2u32)];
    for x in &ints {
        for p in Factorizer::default().prime_divisors(x.magnitude())? {
            if !bad.contains(&p) {
                bad.push(p);
            }
        }
    }
    if bad.len() > SUBSET_PRIMES {
        return Err(QformError::SearchCeiling(ceiling));
    }
    let local_ok = |t: &BigInt, p: &BigUint| -> Result<bool, QformError> {
        let t = Rational::from_integer(t.clone());
        let left = QuadraticForm::diagonal(&[s[0].clone(), s[1].clone(), t.clone()])?;
        let mut rest = s[2..].to_vec();
        rest.push(-t);
        Ok(left.isotropic_at(p)? && QuadraticForm::diagonal(&rest)?.isotropic_at(p)?)
    };
    let patterns = residue_patterns(&bad, &s[2..], &local_ok)?;
    let mut k = 1u64;
    let mut tried = 0u64;
    while tried < ceiling {
        if k == 1 || (!bad.contains(&BigUint::from(k)) && is_probable_prime(&BigUint::from(k))) {
            tried += 1;
            let kb = BigInt::from(k);
            let mut bits = 0u64;
            for (i, p) in bad.iter().enumerate().skip(1) {
                if local::jacobi(&kb, p) == -1 {
                    bits |= 1 << i;
                }
            }
            let r8 = (k % 8) as u8;
            for pat in &patterns {
                if (bits ^ pat.val) & pat.care == 0 && pat.mod8 >> r8 & 1 == 1 {
                    if let Some(v) = attempt(&(&pat.t0 * &kb))? {
                        return Ok(v);
                    }
                }
            }
        }
        k += 2;
    }
    Err(QformError::SearchCeiling(ceiling))
}

/// Admissible choices of t₀ = ε·Π(A) for the split search, each with the
/// Legendre symbols (k/p) (bit i set for −1 at the i-th bad prime, masked by
/// `care`) and residues k mod 8 (bit set in `mod8`) that make t₀·k locally good.
struct Pattern {
    t0: BigInt,
    care: u64,
    val: u64,
    mod8: u8,
}

fn residue_patterns(
    bad: &[BigUint],
    right: &[Rational],
    local_ok: &dyn Fn(&BigInt, &BigUint) -> Result<bool, QformError>,
) -> Result<Vec<Pattern>, QformError> {
    let nb = bad.len();
    let pb: Vec<BigInt> = bad.iter().map(big).collect();
    // good[i][e][u]: t = u·pᵢᵉ is locally good, u running over unit square
    // classes (1, non-residue) for odd p and (1, 3, 5, 7) for p = 2.
    let mut good = vec![[[false; 4]; 2]; nb];
    for (i, p) in bad.iter().enumerate() {
        let units: Vec<BigInt> = if i == 0 {
            [1, 3, 5, 7].map(BigInt::from).to_vec()
        } else {
            let mut n = BigInt::from(2);
            while local::jacobi(&n, p) != -1 {
                n += 1;
            }
            vec![BigInt::one(), n]
        };
        for e in 0..2u32 {
            for (j, u) in units.iter().enumerate() {
                good[i][e as usize][j] = local_ok(&(u * pb[i].pow(e)), p)?;
            }
        }
    }
    // Real place: the left form ⟨+, −, t⟩ is indefinite; the right one needs
    // −t of the sign missing among its entries (or either, if both occur).
    let has_pos = right.iter().any(|x| x.is_positive());
    let has_neg = right.iter().any(|x| x.is_negative());
    let mut out = Vec::new();
    for eps in [1i64, -1] {
        if (eps == 1 && !has_pos) || (eps == -1 && !has_neg) {
            continue;
        }
        'mask: for mask in 0u64..1 << nb {
            let t0: BigInt = pb
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, p)| p.clone())
                .product::<BigInt>()
                * eps;
            let (mut care, mut val, mut mod8) = (0u64, 0u64, 0u8);
            for i in 0..nb {
                let e = (mask >> i & 1) as usize;
                let unit = &t0 / pb[i].pow(e as u32);
                if i == 0 {
                    for r in [1u8, 3, 5, 7] {
                        let u = (&unit * r).mod_floor(&BigInt::from(8));
                        let j = (u.to_u8().expect("residue mod 8") / 2) as usize;
                        if good[0][e][j] {
                            mod8 |= 1 << r;
                        }
                    }
                    if mod8 == 0 {
                        continue 'mask;
                    }
                } else {
                    let chi = local::jacobi(&unit, &bad[i]);
                    // λ = (k/p); the unit class of t is χ·λ.
                    let ok_plus = good[i][e][if chi == 1 { 0 } else { 1 }];
                    let ok_minus = good[i][e][if chi == 1 { 1 } else { 0 }];
                    match (ok_plus, ok_minus) {
                        (true, true) => {}
                        (true, false) => care |= 1 << i,
                        (false, true) => {
                            care |= 1 << i;
                            val |= 1 << i;
                        }
                        (false, false) => continue 'mask,
                    }
                }
            }
            out.push(Pattern { t0, care, val, mod8 });
        }
    }
    out.sort_by(|a, b| a.t0.magnitude().cmp(b.t0.magnitude()));
    Ok(out)
}

/// A zero of Σ dᵢyᵢ² supported on a small isotropic subset of indices.
fn diagonal_search(d: &[Rational], ceiling: u64) -> Result<Vec<Rational>, QformError> {
    let n = d.len();
    let weight = |s: &[usize]| -> f64 {
        s.iter()
            .map(|&i| {
                let x = &d[i];
                (x.numer().magnitude().bits() as f64) + (x.denom().magnitude().bits() as f64)
            })
            .sum()
    };
    let mut budget = ceiling;
    for size in 2..=n.min(5) {
        let mut subsets: Vec<Vec<usize>> = Vec::new();
        combinations(n, size, &mut Vec::new(), 0, &mut subsets);
        subsets.retain(|s| s.iter().any(|&i| d[i].is_positive()) && s.iter().any(|&i| d[i].is_negative()));
        subsets.sort_by(|a, b| weight(a).partial_cmp(&weight(b)).unwrap());
        for s in subsets {
            let coeffs: Vec<Rational> = s.iter().map(|&i| d[i].clone()).collect();
            if size <= 4 {
                let sub = QuadraticForm::diagonal(&coeffs)?;
                if !sub.decide_isotropic()? {
                    continue;
                }
            }
            if let Some(ys) = box_search(&coeffs, &mut budget) {
                let mut y = vec![Rational::zero(); n];
                for (&i, yi) in s.iter().zip(ys) {
                    y[i] = yi;
                }
                return Ok(y);
            }
            if budget == 0 {
                return Err(QformError::SearchCeiling(ceiling));
            }
        }
    }
    Err(QformError::SearchCeiling(ceiling))
}

fn combinations(n: usize, k: usize, cur: &mut Vec<usize>, start: usize, out: &mut Vec<Vec<usize>>) {
    if cur.len() == k {
        out.push(cur.clone());
        return;
    }
    for i in start..n {
        cur.push(i);
        combinations(n, k, cur, i + 1, out);
        cur.pop();
    }
}

fn rational_sqrt(x: &Rational) -> Option<Rational> {
    if x.is_negative() {
        return None;
    }
    let n = exact_sqrt(x.numer().magnitude())?;
    let d = exact_sqrt(x.denom().magnitude())?;
    Some(Rational::new(BigInt::from(n), BigInt::from(d)))
}

/// Searches integer y₁..y_{m−1} in growing sup-norm shells (first nonzero
/// entry positive) for which the last coordinate comes out rational.
/// Decrements `budget` per candidate; None when the budget is spent.
fn box_search(c: &[Rational], budget: &mut u64) -> Option<Vec<Rational>> {
    let m = c.len();
    let last = &c[m - 1];
    let free = m - 1;
    let mut r: i64 = 1;
    loop {
        let mut y = vec![-r; free];
        loop {
            let max = y.iter().map(|v| v.abs()).max().unwrap_or(0);
            let first_pos = y.iter().find(|&&v| v != 0).is_some_and(|&v| v > 0);
            if max == r && first_pos {
                if *budget == 0 {
                    return None;
                }
                *budget -= 1;
                let s: Rational = c[..free]
                    .iter()
                    .zip(&y)
                    .map(|(ci, &yi)| ci * Rational::from_integer(BigInt::from(yi * yi)))
                    .sum();
                if let Some(z) = rational_sqrt(&(-s / last)) {
                    let mut out: Vec<Rational> =
                        y.iter().map(|&v| Rational::from_integer(v.into())).collect();
                    out.push(z);
                    return Some(out);
                }
            }
            // Odometer increment.
            let mut i = 0;
            loop {
                if i == free {
                    break;
                }
                y[i] += 1;
                if y[i] > r {
                    y[i] = -r;
                    i += 1;
                } else {
                    break;
                }
            }
            if i == free {
                break;
            }
        }
        r += 1;
        if r.to_u64().is_some_and(|r| r > 1 << 40) {
            return None;
        }
    }
}
