//! Per-scenario runs, batches and the JSON reports they produce.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::claims::{assemble_isotropic, check_claim_1, check_claim_2, extend_to_lagrangian, w_subspace, ClaimReport};
use super::{initial_u, normalize_u, scaled_norm_form, transport_matrix, q_u_form, u_flags, Normalized, Scenario, Setting, ShapiroError, UElement, UFlags, DIM};
use crate::arith::{serde_rational, Rational};
use crate::linalg::Vector;
use crate::linalg::Matrix;
use crate::qform::{FormInvariants, HyperbolicPair, QuadraticForm, WittDecomposition};
use crate::quat::QuaternionAlgebra;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// q_{u₀} isotropic: normalize u and show q_u hyperbolic.
    Hyperbolic,
    /// q_{u₀} anisotropic, hence definite: show it is a 4-fold Pfister form up to scaling.
    Definite,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantCheck {
    pub invariants: FormInvariants,
    pub e0_trivial: bool,
    pub e1_trivial: bool,
    pub e2_trivial: bool,
    pub in_i3: bool,
}

impl InvariantCheck {
    fn of(form: &QuadraticForm) -> Result<Self, ShapiroError> {
        let inv = form.invariants()?.clone();
        Ok(InvariantCheck {
            e0_trivial: inv.dim % 2 == 0,
            e1_trivial: inv.disc.is_trivial(),
            e2_trivial: inv.clifford.is_trivial(),
            in_i3: form.in_i_n(3)?,
            invariants: inv,
        })
    }

    fn passed(&self) -> bool {
        self.e0_trivial && self.e1_trivial && self.e2_trivial && self.in_i3
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub pass: bool,
    pub failures: Vec<String>,
}

impl Verdict {
    fn from_failures(failures: Vec<String>) -> Self {
        Verdict {
            pass: failures.is_empty(),
            failures,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub scenario: Scenario,
    pub branch: Option<Branch>,
    #[serde(with = "serde_rational::option_vec")]
    pub u0: Option<Vector>,
    pub u0_flags: Option<UFlags>,
    pub normalization: Option<Normalized>,
    /// Gram matrix of q_u (hyperbolic branch) or q_{u₀} (definite branch).
    #[serde(with = "serde_rational::matrix")]
    pub gram: Vec<Vector>,
    pub invariant_check: Option<InvariantCheck>,
    /// Gram of q_u equals Rᵀ·Gram(q_{u₀})·R for R right multiplication by y.
    pub isometry_check: Option<bool>,
    pub claims: Vec<ClaimReport>,
    /// Index (1, 2, 3) of the pure basis element of Q₂ used for V_q.
    pub pure_index: Option<usize>,
    #[serde(with = "serde_rational::matrix")]
    pub isotropic_subspace: Vec<Vector>,
    #[serde(with = "serde_rational::matrix")]
    pub lagrangian: Vec<Vector>,
    pub witt: Option<WittDecomposition>,
    pub similar_to_4_fold_pfister: Option<bool>,
    pub verdict: Verdict,
}

impl ScenarioReport {
    fn empty(scenario: &Scenario) -> Self {
        ScenarioReport {
            scenario: scenario.clone(),
            branch: None,
            u0: None,
            u0_flags: None,
            normalization: None,
            gram: Vec::new(),
            invariant_check: None,
            isometry_check: None,
            claims: Vec::new(),
            pure_index: None,
            isotropic_subspace: Vec::new(),
            lagrangian: Vec::new(),
            witt: None,
            similar_to_4_fold_pfister: None,
            verdict: Verdict::from_failures(Vec::new()),
        }
    }
}

/// Runs one scenario. Invalid input is an error; every other failure is
/// recorded in the verdict.
pub fn run_scenario(scenario: &Scenario) -> Result<ScenarioReport, ShapiroError> {
    scenario.validate()?;
    let mut report = ScenarioReport::empty(scenario);
    let mut failures = Vec::new();
    if let Err(e) = analyze(scenario, &mut report, &mut failures) {
        failures.push(e.to_string());
    }
    report.verdict = Verdict::from_failures(failures);
    Ok(report)
}

fn analyze(sc: &Scenario, r: &mut ScenarioReport, failures: &mut Vec<String>) -> Result<(), ShapiroError> {
    let s = Setting::new(&sc.q1, &sc.q2)?;
    let u0 = initial_u(&s, &sc.c, &sc.lambda)?;
    let flags = u_flags(&s, &u0)?;
    if !flags.symmetric {
        failures.push("u0 is not symmetric".into());
    }
    if !flags.nrd_square {
        failures.push("Nrd_D(u0) is not a square".into());
    }
    r.u0 = Some(u0.clone());
    r.u0_flags = Some(flags);
    match normalize_u(&s, &sc.c, &sc.lambda) {
        Err(ShapiroError::Anisotropic) => {
            r.branch = Some(Branch::Definite);
            let form = QuadraticForm::new(s.q_gram(&u0))?;
            r.gram = form.gram().to_rows();
            let inv = InvariantCheck::of(&form)?;
            if !inv.passed() {
                failures.push("invariants of q_u0 are not trivial".into());
            }
            r.invariant_check = Some(inv);
            let gp = form.in_gp_r(4)?;
            if !gp {
                failures.push("q_u0 is not similar to a 4-fold Pfister form".into());
            }
            r.similar_to_4_fold_pfister = Some(gp);
            Ok(())
        }
        Err(e) => Err(e),
        Ok(n) => {
            r.branch = Some(Branch::Hyperbolic);
            let form = q_u_form(&s, &n.u)?;
            r.gram = form.gram().to_rows();
            let iso = form.gram() == &s.q_gram(&u0).congruence(&s.right_matrix(&n.y));
            if !iso {
                failures.push("q_u is not the transport of q_u0".into());
            }
            r.isometry_check = Some(iso);
            let y = n.y.clone();
            let u = n.u.u.clone();
            r.normalization = Some(n);
            let witt = Transport {
                form: scaled_norm_form(&s, &sc.lambda)?,
                map: transport_matrix(&s, &sc.c, &y)?,
            };
            hyperbolic_checks(&s, &form, &u, Some((&sc.c, &y)), Some(witt), r, failures)
        }
    }
}

/// An isometry `map` from `form` onto q_u, used to carry a Witt
/// decomposition of the diagonal form λ·T over to q_u.
struct Transport {
    form: QuadraticForm,
    map: Matrix,
}

impl Transport {
    fn witt_decompose(&self) -> Result<WittDecomposition, ShapiroError> {
        let wd = self.form.witt_decompose()?;
        Ok(WittDecomposition {
            witt_index: wd.witt_index,
            hyperbolic_basis: wd
                .hyperbolic_basis
                .iter()
                .map(|p| HyperbolicPair {
                    u: self.map.mul_vec(&p.u),
                    v: self.map.mul_vec(&p.v),
                })
                .collect(),
            anisotropic_basis: wd.anisotropic_basis.iter().map(|v| self.map.mul_vec(v)).collect(),
        })
    }
}

/// Shared by scenarios and user-supplied u: invariants, the claims (when the
/// automorphism c is known), the Lagrangian extension and the Witt index.
fn hyperbolic_checks(
    s: &Setting,
    form: &QuadraticForm,
    u: &[Rational],
    transport: Option<(&Vector, &Vector)>,
    witt: Option<Transport>,
    r: &mut ScenarioReport,
    failures: &mut Vec<String>,
) -> Result<(), ShapiroError> {
    let inv = InvariantCheck::of(form)?;
    if !inv.passed() {
        failures.push("invariants of q_u are not trivial".into());
    }
    r.invariant_check = Some(inv);

    let c1 = check_claim_1(s, u);
    let mut subspace = s.q1_basis();
    r.claims.push(c1);
    if let Some((c, y)) = transport {
        let (span, q, c3) = assemble_isotropic(s, u, c, y)?;
        let w = w_subspace(s, c, y, q)?;
        r.claims.push(check_claim_2(s, u, &w));
        r.claims.push(c3);
        r.pure_index = Some(q);
        subspace = span;
    }
    for c in &r.claims {
        if !c.passed {
            failures.push(format!("{}: {}", c.name, c.failures.join("; ")));
        }
    }

    let wd = match witt {
        Some(t) => t.witt_decompose()?,
        None => form.witt_decompose()?,
    };
    if let Err(e) = wd.verify(form) {
        failures.push(format!("Witt decomposition: {e}"));
    }
    if wd.witt_index != DIM / 2 {
        failures.push(format!("Witt index {} ≠ {}", wd.witt_index, DIM / 2));
    }
    r.witt = Some(wd);
    match extend_to_lagrangian(form, &subspace) {
        Ok(l) => r.lagrangian = l,
        Err(e) => failures.push(format!("Lagrangian extension: {e}")),
    }
    r.isotropic_subspace = subspace;
    Ok(())
}

/// Hex SHA-256 of the bytes that determine a run.
pub fn input_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchReport {
    pub version: String,
    pub input_hash: String,
    pub seed: u64,
    pub count: usize,
    pub scenarios: Vec<ScenarioReport>,
}

/// `count` sampled scenarios with seeds seed, seed+1, …, run in parallel and
/// reported in seed order.
pub fn run_batch(count: usize, seed: u64) -> BatchReport {
    let scenarios = (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let sc = Scenario::sample(seed.wrapping_add(i));
            run_scenario(&sc).expect("sampled scenarios are valid")
        })
        .collect();
    let input = format!("run count={count} seed={seed}");
    BatchReport {
        version: crate::VERSION.into(),
        input_hash: input_hash(input.as_bytes()),
        seed,
        count,
        scenarios,
    }
}

impl BatchReport {
    pub fn passed(&self) -> usize {
        self.scenarios.iter().filter(|r| r.verdict.pass).count()
    }

    pub fn all_passed(&self) -> bool {
        self.passed() == self.scenarios.len()
    }

    /// One row per scenario plus a total line.
    pub fn summary_table(&self) -> String {
        let mut out = format!(
            "{:>20}  {:<10}  {:<10}  {:<10}  {:>5}  {:>4}  {}\n",
            "seed", "Q1", "Q2", "branch", "index", "dimS", "result"
        );
        for r in &self.scenarios {
            let branch = match r.branch {
                Some(Branch::Hyperbolic) => "hyperbolic",
                Some(Branch::Definite) => "definite",
                None => "-",
            };
            let index = r.witt.as_ref().map_or("-".to_string(), |w| w.witt_index.to_string());
            out.push_str(&format!(
                "{:>20}  {:<10}  {:<10}  {:<10}  {:>5}  {:>4}  {}\n",
                r.scenario.seed,
                r.scenario.q1.to_string(),
                r.scenario.q2.to_string(),
                branch,
                index,
                r.isotropic_subspace.len(),
                if r.verdict.pass { "PASS" } else { "FAIL" }
            ));
        }
        out.push_str(&format!("{}/{} scenarios passed\n", self.passed(), self.scenarios.len()));
        out
    }
}

/// A user-supplied u, optionally with the automorphism c it came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UInput {
    pub q1: QuaternionAlgebra,
    pub q2: QuaternionAlgebra,
    #[serde(with = "serde_rational::vec")]
    pub u: Vector,
    #[serde(default, with = "serde_rational::option_vec")]
    pub c: Option<Vector>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UReport {
    pub version: String,
    pub input_hash: String,
    pub u: UElement,
    /// λ with u·c·γ(c) = λ, when c is given.
    #[serde(with = "serde_rational::option")]
    pub lambda: Option<Rational>,
    pub report: ScenarioReport,
}

/// Validates u and runs the hyperbolic checks on q_u. Without c only the
/// first claim is available; with c, u·c·γ(c) must be a nonzero scalar.
pub fn verify_u(input: &UInput, raw: &[u8]) -> Result<UReport, ShapiroError> {
    let s = Setting::new(&input.q1, &input.q2)?;
    let u = UElement::new(&s, input.u.clone())?;
    let lambda = match &input.c {
        None => None,
        Some(c) => {
            if c.len() != DIM || !s.is_invertible(c) {
                return Err(ShapiroError::Validation("c must be an invertible element of D".into()));
            }
            match s.scalar_of(&s.mul(&u.u, &s.mul(c, &s.gamma(c)))) {
                Some(l) if !num_traits::Zero::is_zero(&l) => Some(l),
                _ => return Err(ShapiroError::Validation("u·c·γ(c) is not a nonzero scalar".into())),
            }
        }
    };
    let scenario = Scenario {
        seed: 0,
        q1: input.q1.clone(),
        q2: input.q2.clone(),
        c: input.c.clone().unwrap_or_else(|| s.one()),
        lambda: lambda.clone().unwrap_or_else(|| num_traits::One::one()),
    };
    let mut r = ScenarioReport::empty(&scenario);
    r.branch = Some(Branch::Hyperbolic);
    let mut failures = Vec::new();
    let form = q_u_form(&s, &u)?;
    r.gram = form.gram().to_rows();
    let one = s.one();
    let transport = input.c.as_ref().map(|c| (c, &one));
    let witt = match (&input.c, &lambda) {
        (Some(c), Some(l)) => Some(Transport {
            form: scaled_norm_form(&s, l)?,
            map: transport_matrix(&s, c, &one)?,
        }),
        _ => None,
    };
    if let Err(e) = hyperbolic_checks(&s, &form, &u.u, transport, witt, &mut r, &mut failures) {
        failures.push(e.to_string());
    }
    r.verdict = Verdict::from_failures(failures);
    Ok(UReport {
        version: crate::VERSION.into(),
        input_hash: input_hash(raw),
        u,
        lambda,
        report: r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::int;
    use crate::linalg;

    #[test]
    fn batch_is_deterministic_and_ordered() {
        let a = run_batch(3, 100);
        let b = run_batch(3, 100);
        assert_eq!(a, b);
        let seeds: Vec<u64> = a.scenarios.iter().map(|r| r.scenario.seed).collect();
        assert_eq!(seeds, vec![100, 101, 102]);
        assert!(a.all_passed(), "{}", a.summary_table());
    }

    #[test]
    fn definite_branch_passes() {
        let sc = Scenario {
            seed: 0,
            q1: QuaternionAlgebra::from_i64(-1, -1).unwrap(),
            q2: QuaternionAlgebra::from_i64(-1, -1).unwrap(),
            c: linalg::unit_vector(DIM, 0),
            lambda: int(2),
        };
        let r = run_scenario(&sc).unwrap();
        assert_eq!(r.branch, Some(Branch::Definite));
        assert_eq!(r.similar_to_4_fold_pfister, Some(true));
        assert!(r.verdict.pass, "{:?}", r.verdict.failures);
    }

    #[test]
    fn invalid_scenario_is_rejected() {
        let mut sc = Scenario::sample(1);
        sc.c = vec![int(0); DIM];
        assert!(matches!(run_scenario(&sc), Err(ShapiroError::Validation(_))));
    }

    #[test]
    fn verify_u_round_trip() {
        let sc = (0..40)
            .map(Scenario::sample)
            .find(|sc| super::super::make_u(sc).is_ok())
            .unwrap();
        let n = super::super::make_u(&sc).unwrap();
        let s = Setting::new(&sc.q1, &sc.q2).unwrap();
        // u = λ·(m·γ(m))⁻¹ with m = γ(y)⁻¹·c.
        let m = s.mul(&s.inverse(&s.gamma(&n.y)).unwrap(), &sc.c);
        let input = UInput {
            q1: sc.q1.clone(),
            q2: sc.q2.clone(),
            u: n.u.u.clone(),
            c: Some(m),
        };
        let rep = verify_u(&input, b"x").unwrap();
        assert_eq!(rep.lambda, Some(sc.lambda.clone()));
        assert!(rep.report.verdict.pass, "{:?}", rep.report.verdict.failures);
        let bare = UInput { c: None, ..input };
        let rep = verify_u(&bare, b"x").unwrap();
        assert!(rep.report.verdict.pass);
        assert_eq!(rep.report.claims.len(), 1);
    }

    #[test]
    fn verify_u_rejects_invalid_u() {
        let input = UInput {
            q1: QuaternionAlgebra::from_i64(-1, -1).unwrap(),
            q2: QuaternionAlgebra::from_i64(2, 3).unwrap(),
            u: linalg::unit_vector(DIM, 0),
            c: None,
        };
        assert!(matches!(verify_u(&input, b""), Err(ShapiroError::Validation(_))));
    }
}
