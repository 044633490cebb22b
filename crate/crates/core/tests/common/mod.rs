#![allow(dead_code)]

use pfister_core::arith::{int, Rational};
use pfister_core::linalg::Matrix;
use pfister_core::qform::QuadraticForm;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn nonzero(rng: &mut ChaCha8Rng, bound: i64) -> i64 {
    loop {
        let x = rng.gen_range(-bound..=bound);
        if x != 0 {
            return x;
        }
    }
}

pub fn diag(entries: &[i64]) -> QuadraticForm {
    QuadraticForm::diagonal_i64(entries).unwrap()
}

/// Random non-degenerate symmetric Gram matrix with entries in [−bound, bound].
pub fn random_form(rng: &mut ChaCha8Rng, dim: usize, bound: i64) -> QuadraticForm {
    loop {
        let mut g = Matrix::zeros(dim, dim);
        for i in 0..dim {
            for j in i..dim {
                let x = int(rng.gen_range(-bound..=bound));
                g[(i, j)] = x.clone();
                g[(j, i)] = x;
            }
        }
        if let Ok(q) = QuadraticForm::new(g) {
            return q;
        }
    }
}

/// Random invertible integer matrix with entries in [−bound, bound].
pub fn random_invertible(rng: &mut ChaCha8Rng, dim: usize, bound: i64) -> Matrix {
    loop {
        let rows: Vec<Vec<Rational>> = (0..dim)
            .map(|_| (0..dim).map(|_| int(rng.gen_range(-bound..=bound))).collect())
            .collect();
        let m = Matrix::from_rows(rows);
        if !num_traits::Zero::is_zero(&m.det()) {
            return m;
        }
    }
}

/// The form with its basis scrambled by a random congruence.
pub fn disguise(rng: &mut ChaCha8Rng, q: &QuadraticForm) -> QuadraticForm {
    let p = random_invertible(rng, q.dim(), 2);
    q.transform(&p).unwrap()
}
