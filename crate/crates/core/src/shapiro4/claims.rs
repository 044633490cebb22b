//! The three isotropy claims and the assembly of a five-dimensional
//! totally isotropic subspace of q_u.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::{Setting, ShapiroError, DIM};
use crate::arith::Rational;
use crate::linalg::{self, Matrix, Vector};
use crate::qform::QuadraticForm;

/// Outcome of one claim: how many exact identities were checked and which failed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimReport {
    pub name: String,
    pub passed: bool,
    pub checks: usize,
    pub failures: Vec<String>,
}

impl ClaimReport {
    fn new(name: &str) -> Self {
        ClaimReport {
            name: name.into(),
            passed: true,
            checks: 0,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.passed = false;
            self.failures.push(what());
        }
    }
}

fn check_totally_isotropic(s: &Setting, u: &[Rational], vs: &[Vector], label: &str, r: &mut ClaimReport) {
    for (i, x) in vs.iter().enumerate() {
        for (j, y) in vs.iter().enumerate().skip(i) {
            r.check(s.polar(u, x, y).is_zero(), || format!("b_u({label}{i}, {label}{j}) ≠ 0"));
        }
    }
}

/// Q₁⊗1 is totally isotropic for q_u and Trd_D(x·u) = 0 on it.
pub fn check_claim_1(s: &Setting, u: &[Rational]) -> ClaimReport {
    let mut r = ClaimReport::new("Q1 totally isotropic");
    let basis = s.q1_basis();
    check_totally_isotropic(s, u, &basis, "x", &mut r);
    for (i, x) in basis.iter().enumerate() {
        r.check(s.trd(&s.mul(x, u)).is_zero(), || format!("Trd_D(x{i}·u) ≠ 0"));
    }
    r
}

/// W_q: the image of {x⊗q : x ∈ Q₁⁰} under Int(c), transported along
/// w ↦ γ(y)⁻¹·w·γ(y). `q` indexes the pure basis of Q₂ (1, 2, 3).
pub fn w_subspace(s: &Setting, c: &[Rational], y: &[Rational], q: usize) -> Result<Vec<Vector>, ShapiroError> {
    if !(1..4).contains(&q) {
        return Err(ShapiroError::Validation(format!("pure index {q} not in 1..3")));
    }
    let c_inv = s.inverse(c)?;
    let gy = s.gamma(y);
    let gy_inv = s.inverse(&gy)?;
    Ok((1..4)
        .map(|a| {
            let w0 = s.mul3(c, &s.basis(4 * a + q), &c_inv);
            s.mul3(&gy_inv, &w0, &gy)
        })
        .collect())
}

/// γ(w)·u = u·w and w² ∈ ℚ on W_q; γ(W_q) is totally isotropic for q_u.
pub fn check_claim_2(s: &Setting, u: &[Rational], w: &[Vector]) -> ClaimReport {
    let mut r = ClaimReport::new("gamma(W_q) totally isotropic");
    let trd_u = s.trd(u);
    for (i, wi) in w.iter().enumerate() {
        let gw = s.gamma(wi);
        r.check(s.mul(&gw, u) == s.mul(u, wi), || format!("γ(w{i})·u ≠ u·w{i}"));
        match s.scalar_of(&s.mul(wi, wi)) {
            Some(sq) => r.check(s.q(u, &gw) == sq * &trd_u, || format!("q_u(γ(w{i})) ≠ w{i}²·Trd_D(u)")),
            None => r.check(false, || format!("w{i}² is not a scalar")),
        }
    }
    let gw: Vec<Vector> = w.iter().map(|x| s.gamma(x)).collect();
    check_totally_isotropic(s, u, &gw, "γ(w)", &mut r);
    r
}

/// T = ker(z ↦ Trd_D(u·γ(z))).
fn trace_kernel(s: &Setting, u: &[Rational]) -> Vec<Vector> {
    let row: Vector = (0..DIM).map(|k| s.trd(&s.mul(u, &s.gamma(&s.basis(k))))).collect();
    Matrix::from_rows(vec![row]).nullspace()
}

/// V_q: the first two reduced-echelon vectors of T ∩ γ(W_q).
pub fn build_v_q(s: &Setting, u: &[Rational], w: &[Vector]) -> Result<Vec<Vector>, ShapiroError> {
    let gw: Vec<Vector> = w.iter().map(|x| s.gamma(x)).collect();
    let meet = linalg::intersect_spans(&trace_kernel(s, u), &gw);
    if meet.len() < 2 {
        return Err(ShapiroError::Construction(format!(
            "T ∩ γ(W_q) has dimension {}",
            meet.len()
        )));
    }
    Ok(meet.into_iter().take(2).collect())
}

/// Q₁ + V_q for the first pure basis element q of Q₂ with V_q ⊄ Q₁.
/// Returns the subspace basis, the index of q and the claim report.
pub fn assemble_isotropic(
    s: &Setting,
    u: &[Rational],
    c: &[Rational],
    y: &[Rational],
) -> Result<(Vec<Vector>, usize, ClaimReport), ShapiroError> {
    let q1 = s.q1_basis();
    for q in 1..4 {
        let w = w_subspace(s, c, y, q)?;
        let v = build_v_q(s, u, &w)?;
        let mut all = q1.clone();
        all.extend(v.iter().cloned());
        let span = linalg::span_basis(&all);
        if span.len() < 5 {
            continue;
        }
        let mut r = ClaimReport::new("Q1 + V_q totally isotropic");
        let kernel_row: Vector = (0..DIM).map(|k| s.trd(&s.mul(u, &s.gamma(&s.basis(k))))).collect();
        for (i, vi) in v.iter().enumerate() {
            r.check(linalg::dot(&kernel_row, vi).is_zero(), || format!("v{i} ∉ T"));
        }
        r.check(span.len() >= 5, || format!("dimension {} < 5", span.len()));
        check_totally_isotropic(s, u, &span, "s", &mut r);
        return Ok((span, q, r));
    }
    Err(ShapiroError::Construction("V_q ⊆ Q1 for every pure basis element".into()))
}

/// Extends a totally isotropic subspace of a hyperbolic form to a Lagrangian:
/// a complement C of S in S^⊥ carries a hyperbolic form whose Lagrangian,
/// added to S, is maximal.
pub fn extend_to_lagrangian(form: &QuadraticForm, sub: &[Vector]) -> Result<Vec<Vector>, ShapiroError> {
    let n = form.dim();
    let s = linalg::span_basis(sub);
    let rows: Vec<Vector> = s.iter().map(|v| form.gram().mul_vec(v)).collect();
    let perp = Matrix::from_rows(rows).nullspace();
    let mut chosen = s.clone();
    let mut complement = Vec::new();
    for v in perp {
        let mut trial = chosen.clone();
        trial.push(v.clone());
        if linalg::span_rank(&trial) > chosen.len() {
            chosen = trial;
            complement.push(v);
        }
    }
    let mut lagrangian = s.clone();
    if !complement.is_empty() {
        let restricted = form.restrict(&complement)?;
        let wd = restricted.witt_decompose()?;
        for coef in wd.lagrangian() {
            let mut v = vec![Rational::zero(); n];
            for (ci, basis) in coef.iter().zip(&complement) {
                if !ci.is_zero() {
                    v = linalg::vec_add(&v, &linalg::vec_scale(basis, ci));
                }
            }
            lagrangian.push(v);
        }
    }
    let ok = lagrangian.len() == n / 2
        && linalg::span_rank(&lagrangian) == n / 2
        && lagrangian
            .iter()
            .enumerate()
            .all(|(i, x)| lagrangian[i..].iter().all(|y| form.polar(x, y).is_zero()));
    if !ok {
        return Err(ShapiroError::Construction(format!(
            "extension reached dimension {} of {}",
            lagrangian.len(),
            n / 2
        )));
    }
    Ok(lagrangian)
}
