//! Dense matrices over ℚ and a few integer-lattice helpers.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::arith::{format_rational, Rational};

pub type Vector = Vec<Rational>;

#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(format_rational).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = Rational;
    fn index(&self, (r, c): (usize, usize)) -> &Rational {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Rational {
        &mut self.data[r * self.cols + c]
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn diagonal(d: &[Rational]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, x) in d.iter().enumerate() {
            m[(i, i)] = x.clone();
        }
        m
    }

    /// Builds a matrix from rows; panics on ragged input.
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_cols(cols: &[Vector]) -> Self {
        let c = cols.len();
        let r = cols.first().map_or(0, |x| x.len());
        let mut m = Self::zeros(r, c);
        for (j, col) in cols.iter().enumerate() {
            for (i, x) in col.iter().enumerate() {
                m[(i, j)] = x.clone();
            }
        }
        m
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| Rational::from_integer(x.into())).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, r: usize) -> &[Rational] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col(&self, c: usize) -> Vector {
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vector {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|r| dot(self.row(r), v))
            .collect()
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, s: &Rational) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn trace(&self) -> Rational {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)].clone()).sum()
    }

    /// Pᵀ·self·P.
    pub fn congruence(&self, p: &Matrix) -> Matrix {
        p.transpose().mul(self).mul(p)
    }

    pub fn kronecker(&self, other: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = &self[(i, j)];
                if a.is_zero() {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out[(i * other.rows + k, j * other.cols + l)] = a * &other[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// Reduced row echelon form and the pivot columns.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m[(i, c)].is_zero()) else {
                continue;
            };
            m.swap_rows(r, p);
            let inv = m[(r, c)].recip();
            for j in c..m.cols {
                let v = &m[(r, j)] * &inv;
                m[(r, j)] = v;
            }
            for i in 0..m.rows {
                if i != r && !m[(i, c)].is_zero() {
                    let f = m[(i, c)].clone();
                    for j in c..m.cols {
                        let v = &m[(r, j)] * &f;
                        m[(i, j)] -= v;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of {x : self·x = 0}, one vector per free column.
    pub fn nullspace(&self) -> Vec<Vector> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![Rational::zero(); self.cols];
                v[f] = Rational::one();
                for (i, &p) in pivots.iter().enumerate() {
                    v[p] = -r[(i, f)].clone();
                }
                v
            })
            .collect()
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    pub fn det(&self) -> Rational {
        assert!(self.is_square());
        let mut m = self.clone();
        let n = m.rows;
        let mut det = Rational::one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| !m[(i, c)].is_zero()) else {
                return Rational::zero();
            };
            if p != c {
                m.swap_rows(p, c);
                det = -det;
            }
            let piv = m[(c, c)].clone();
            det *= &piv;
            for i in c + 1..n {
                if m[(i, c)].is_zero() {
                    continue;
                }
                let f = &m[(i, c)] / &piv;
                for j in c..n {
                    let v = &m[(c, j)] * &f;
                    m[(i, j)] -= v;
                }
            }
        }
        det
    }

    pub fn inverse(&self) -> Option<Matrix> {
        assert!(self.is_square());
        let n = self.rows;
        let mut aug = Matrix::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, n + i)] = Rational::one();
        }
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        let mut inv = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv[(i, j)] = r[(i, n + j)].clone();
            }
        }
        Some(inv)
    }

    /// Solves self·x = b, returning one solution if any.
    pub fn solve(&self, b: &[Rational]) -> Option<Vector> {
        let mut aug = Matrix::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, self.cols)] = b[i].clone();
        }
        let (r, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![Rational::zero(); self.cols];
        for (i, &p) in pivots.iter().enumerate() {
            x[p] = r[(i, self.cols)].clone();
        }
        Some(x)
    }

    /// Characteristic polynomial det(t·I − self), coefficients from constant term up.
    pub fn charpoly(&self) -> Vec<Rational> {
        assert!(self.is_square());
        // Faddeev-LeVerrier
        let n = self.rows;
        let mut coeffs = vec![Rational::zero(); n + 1];
        coeffs[n] = Rational::one();
        let mut m = Matrix::zeros(n, n);
        let id = Matrix::identity(n);
        for k in 1..=n {
            m = self.mul(&m).add(&id.scale(&coeffs[n - k + 1]));
            let am = self.mul(&m);
            coeffs[n - k] = -am.trace() / Rational::from_integer(BigInt::from(k));
        }
        coeffs
    }
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter()
        .zip(b)
        .filter(|(x, y)| !x.is_zero() && !y.is_zero())
        .map(|(x, y)| x * y)
        .sum()
}

pub fn vec_add(a: &[Rational], b: &[Rational]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn vec_sub(a: &[Rational], b: &[Rational]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn vec_scale(a: &[Rational], s: &Rational) -> Vector {
    a.iter().map(|x| x * s).collect()
}

pub fn unit_vector(n: usize, i: usize) -> Vector {
    let mut v = vec![Rational::zero(); n];
    v[i] = Rational::one();
    v
}

/// Bilinear form xᵀ·G·y.
pub fn bilinear(g: &Matrix, x: &[Rational], y: &[Rational]) -> Rational {
    dot(x, &g.mul_vec(y))
}

/// Rank of a list of vectors.
pub fn span_rank(vs: &[Vector]) -> usize {
    if vs.is_empty() {
        return 0;
    }
    Matrix::from_rows(vs.to_vec()).rank()
}

/// Reduced-echelon basis of the span of `vs`.
pub fn span_basis(vs: &[Vector]) -> Vec<Vector> {
    if vs.is_empty() {
        return Vec::new();
    }
    let (r, pivots) = Matrix::from_rows(vs.to_vec()).rref();
    (0..pivots.len()).map(|i| r.row(i).to_vec()).collect()
}

/// Basis of span(a) ∩ span(b).
pub fn intersect_spans(a: &[Vector], b: &[Vector]) -> Vec<Vector> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    // Solve Σ αᵢaᵢ − Σ βⱼbⱼ = 0.
    let n = a[0].len();
    let mut cols: Vec<Vector> = a.to_vec();
    cols.extend(b.iter().map(|v| v.iter().map(|x| -x).collect::<Vector>()));
    let m = Matrix::from_cols(&cols);
    debug_assert_eq!(m.rows(), n);
    let vecs: Vec<Vector> = m
        .nullspace()
        .into_iter()
        .map(|coef| {
            let mut v = vec![Rational::zero(); n];
            for (i, ai) in a.iter().enumerate() {
                if !coef[i].is_zero() {
                    v = vec_add(&v, &vec_scale(ai, &coef[i]));
                }
            }
            v
        })
        .collect();
    span_basis(&vecs)
}

/// Least common multiple of the denominators.
pub fn common_denominator(xs: &[Rational]) -> BigInt {
    xs.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

/// Scales a nonzero rational vector to a primitive integer vector
/// whose first nonzero entry is positive.
pub fn primitive_integer_vector(v: &[Rational]) -> Vec<BigInt> {
    let d = common_denominator(v);
    let ints: Vec<BigInt> = v.iter().map(|x| (x * &d).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return ints;
    }
    let sign = if ints.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative()) {
        -BigInt::one()
    } else {
        BigInt::one()
    };
    ints.into_iter().map(|x| x / &g * &sign).collect()
}

pub fn to_rational_vec(v: &[BigInt]) -> Vector {
    v.iter().map(|x| Rational::from_integer(x.clone())).collect()
}

/// Basis of the integer kernel {x ∈ ℤⁿ : A·x = 0} of an integer m×n matrix,
/// computed by unimodular column operations.
pub fn integer_kernel(a: &[Vec<BigInt>], n: usize) -> Vec<Vec<BigInt>> {
    let m = a.len();
    // Columns of A stacked over the identity; operate on columns.
    let mut cols: Vec<Vec<BigInt>> = (0..n)
        .map(|j| {
            let mut c: Vec<BigInt> = (0..m).map(|i| a[i][j].clone()).collect();
            c.extend((0..n).map(|k| if k == j { BigInt::one() } else { BigInt::zero() }));
            c
        })
        .collect();
    let mut start = 0;
    for row in 0..m {
        // Reduce entries in `row` among columns start.. to a single nonzero.
        loop {
            let nz: Vec<usize> = (start..n).filter(|&j| !cols[j][row].is_zero()).collect();
            if nz.len() <= 1 {
                if let Some(&j) = nz.first() {
                    cols.swap(start, j);
                    start += 1;
                }
                break;
            }
            let piv = *nz
                .iter()
                .min_by(|&&x, &&y| cols[x][row].abs().cmp(&cols[y][row].abs()))
                .unwrap();
            for &j in &nz {
                if j == piv {
                    continue;
                }
                let q = cols[j][row].div_floor(&cols[piv][row]);
                if q.is_zero() {
                    continue;
                }
                let pc = cols[piv].clone();
                for (x, y) in cols[j].iter_mut().zip(&pc) {
                    *x -= &q * y;
                }
            }
        }
    }
    cols[start..].iter().map(|c| c[m..].to_vec()).collect()
}

/// Row space built one equation at a time, kept in reduced echelon form.
#[derive(Debug, Clone)]
pub struct Echelon {
    cols: usize,
    rows: Vec<(usize, Vector)>,
}

impl Echelon {
    pub fn new(cols: usize) -> Self {
        Echelon { cols, rows: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Adds a row; returns whether the rank grew.
    pub fn insert(&mut self, row: &[Rational]) -> bool {
        let mut v = row.to_vec();
        for (p, r) in &self.rows {
            if !v[*p].is_zero() {
                let f = v[*p].clone();
                for (x, y) in v.iter_mut().zip(r) {
                    if !y.is_zero() {
                        *x -= &f * y;
                    }
                }
            }
        }
        let Some(p) = v.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = v[p].recip();
        for x in v.iter_mut() {
            *x *= &inv;
        }
        for (_, r) in self.rows.iter_mut() {
            if !r[p].is_zero() {
                let f = r[p].clone();
                for (x, y) in r.iter_mut().zip(&v) {
                    if !y.is_zero() {
                        *x -= &f * y;
                    }
                }
            }
        }
        self.rows.push((p, v));
        true
    }

    /// Basis of the solution space of all inserted equations.
    pub fn nullspace(&self) -> Vec<Vector> {
        let pivots: Vec<usize> = self.rows.iter().map(|(p, _)| *p).collect();
        (0..self.cols)
            .filter(|c| !pivots.contains(c))
            .map(|f| {
                let mut v = vec![Rational::zero(); self.cols];
                v[f] = Rational::one();
                for (p, r) in &self.rows {
                    v[*p] = -r[f].clone();
                }
                v
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, rat};

    #[test]
    fn det_and_inverse() {
        let m = Matrix::from_i64(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 4]]);
        assert_eq!(m.det(), int(18));
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), Matrix::identity(3));
        let sing = Matrix::from_i64(&[&[1, 2], &[2, 4]]);
        assert_eq!(sing.det(), int(0));
        assert!(sing.inverse().is_none());
    }

    #[test]
    fn nullspace_and_solve() {
        let m = Matrix::from_i64(&[&[1, 2, 3], &[2, 4, 6]]);
        let ns = m.nullspace();
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!(m.mul_vec(v).iter().all(Zero::is_zero));
        }
        let a = Matrix::from_i64(&[&[1, 1], &[1, -1]]);
        assert_eq!(a.solve(&[int(3), int(1)]).unwrap(), vec![int(2), int(1)]);
    }

    #[test]
    fn charpoly_of_companion() {
        // t² − 3t + 2
        let m = Matrix::from_i64(&[&[1, 0], &[0, 2]]);
        assert_eq!(m.charpoly(), vec![int(2), int(-3), int(1)]);
        let r = Matrix::from_rows(vec![vec![rat(1, 2), int(1)], vec![int(0), int(3)]]);
        assert_eq!(r.charpoly(), vec![rat(3, 2), rat(-7, 2), int(1)]);
    }

    #[test]
    fn kronecker_mixed_product() {
        let a = Matrix::from_i64(&[&[1, 2], &[3, 4]]);
        let b = Matrix::from_i64(&[&[0, 1], &[1, 0]]);
        let c = Matrix::from_i64(&[&[2, 0], &[1, 1]]);
        let d = Matrix::from_i64(&[&[1, 1], &[0, 1]]);
        assert_eq!(
            a.kronecker(&b).mul(&c.kronecker(&d)),
            a.mul(&c).kronecker(&b.mul(&d))
        );
    }

    #[test]
    fn integer_kernel_is_saturated() {
        let a = vec![vec![BigInt::from(2), BigInt::from(4), BigInt::from(6)]];
        let k = integer_kernel(&a, 3);
        assert_eq!(k.len(), 2);
        for v in &k {
            let s: BigInt = v.iter().zip(&a[0]).map(|(x, y)| x * y).sum();
            assert!(s.is_zero());
        }
        // (1,1,-1) lies in the kernel and must be an integer combination.
        let m = Matrix::from_cols(&k.iter().map(|v| to_rational_vec(v)).collect::<Vec<_>>());
        let x = m.solve(&[int(1), int(1), int(-1)]).unwrap();
        assert!(x.iter().all(|c| c.is_integer()));
    }

    #[test]
    fn span_intersection() {
        let a = vec![vec![int(1), int(0), int(0)], vec![int(0), int(1), int(0)]];
        let b = vec![vec![int(0), int(1), int(0)], vec![int(0), int(0), int(1)]];
        assert_eq!(intersect_spans(&a, &b), vec![vec![int(0), int(1), int(0)]]);
    }

    #[test]
    fn echelon_matches_batch_nullspace() {
        let rows = [[1, 2, 0, -1], [2, 4, 1, 0], [3, 6, 1, -1], [0, 0, 0, 5]];
        let mut e = Echelon::new(4);
        let grew: Vec<bool> = rows
            .iter()
            .map(|r| e.insert(&r.iter().map(|&x| int(x)).collect::<Vec<_>>()))
            .collect();
        assert_eq!(grew, vec![true, true, false, true]);
        let m = Matrix::from_i64(&rows.iter().map(|r| &r[..]).collect::<Vec<_>>());
        assert_eq!(e.nullspace(), m.nullspace());
    }
}
