use std::fmt::Display;
use std::fs;
use std::path::Path;

use pfister_core::arith::{format_rational, parse_rational, Rational};
use pfister_core::csa::{CsaError, InvolutionAlgebra, InvolutionType};
use pfister_core::qform::QuadraticForm;
use pfister_core::quat::QuaternionAlgebra;
use pfister_core::shapiro4::{self, BatchReport, Scenario, ShapiroError, UInput};
use serde::Serialize;
use serde_json::{json, Value};

/// stdout writes that ignore a closed pipe.
macro_rules! out {
    ($($t:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout().lock(), $($t)*);
    }};
}

macro_rules! out_raw {
    ($($t:tt)*) => {{
        use std::io::Write;
        let _ = write!(std::io::stdout().lock(), $($t)*);
    }};
}

use crate::{FormInput, QfCommand, QuatCommand, ShapiroCommand, Symbols};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok = 0,
    Negative = 1,
}

impl From<bool> for Outcome {
    fn from(b: bool) -> Self {
        if b {
            Outcome::Ok
        } else {
            Outcome::Negative
        }
    }
}

pub type CmdResult = Result<Outcome, String>;

fn err(e: impl Display) -> String {
    e.to_string()
}

fn print_json(v: &impl Serialize) -> Result<(), String> {
    out!("{}", serde_json::to_string_pretty(v).map_err(err)?);
    Ok(())
}

fn read(path: &Path) -> Result<Vec<u8>, String> {
    fs::read(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn parse_diag(list: &str) -> Result<QuadraticForm, String> {
    let entries = list
        .split(',')
        .map(|s| parse_rational(s.trim()).map_err(err))
        .collect::<Result<Vec<_>, _>>()?;
    QuadraticForm::diagonal(&entries).map_err(err)
}

fn form_from_file(path: &Path) -> Result<QuadraticForm, String> {
    serde_json::from_slice(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_form(input: &FormInput) -> Result<QuadraticForm, String> {
    match (&input.diag, &input.file) {
        (Some(d), _) => parse_diag(d),
        (None, Some(f)) => form_from_file(f),
        (None, None) => Err("give --diag or a form file".into()),
    }
}

/// A file path if one exists, otherwise a diagonal list.
fn form_arg(arg: &str) -> Result<QuadraticForm, String> {
    let p = Path::new(arg);
    if p.is_file() {
        form_from_file(p)
    } else {
        parse_diag(arg)
    }
}

pub fn qf(cmd: QfCommand) -> CmdResult {
    match cmd {
        QfCommand::Invariants(input) => {
            let q = load_form(&input)?;
            print_json(q.invariants().map_err(err)?)?;
            Ok(Outcome::Ok)
        }
        QfCommand::Witt(input) => {
            let q = load_form(&input)?;
            let wd = q.witt_decompose().map_err(err)?;
            wd.verify(&q)?;
            print_json(&wd)?;
            Ok(Outcome::Ok)
        }
        QfCommand::Pfister { r, form } => {
            let q = load_form(&form)?;
            let ans = q.in_gp_r(r).map_err(err)?;
            out!("{ans}");
            Ok(ans.into())
        }
        QfCommand::Isometric { a, b } => {
            let ans = form_arg(&a)?.is_isometric(&form_arg(&b)?).map_err(err)?;
            out!("{ans}");
            Ok(ans.into())
        }
    }
}

fn algebra(s: &Symbols) -> Result<QuaternionAlgebra, String> {
    let a = parse_rational(&s.a).map_err(err)?;
    let b = parse_rational(&s.b).map_err(err)?;
    QuaternionAlgebra::new(a, b).map_err(err)
}

fn strings(xs: &[Rational]) -> Vec<String> {
    xs.iter().map(format_rational).collect()
}

pub fn quat(cmd: QuatCommand) -> CmdResult {
    match cmd {
        QuatCommand::Split(s) => {
            let q = algebra(&s)?;
            let split = q.is_split().map_err(err)?;
            let mut out = json!({
                "algebra": q.to_string(),
                "split": split,
                "brauer_class": q.brauer_class().map_err(err)?,
            });
            if split {
                out["zero_divisor"] = json!(strings(&q.zero_divisor().map_err(err)?.coords));
            }
            print_json(&out)?;
            Ok(split.into())
        }
        QuatCommand::Normform(s) => {
            print_json(&algebra(&s)?.norm_form())?;
            Ok(Outcome::Ok)
        }
        QuatCommand::Splitmap(s) => {
            let q = algebra(&s)?;
            if !q.is_split().map_err(err)? {
                out!("{q} is not split");
                return Ok(Outcome::Negative);
            }
            let map = q.splitting_isomorphism().map_err(err)?;
            let images: Vec<Vec<Vec<String>>> = map
                .images
                .iter()
                .map(|m| m.to_rows().iter().map(|r| strings(r)).collect())
                .collect();
            print_json(&json!({
                "algebra": q.to_string(),
                "1": images[0],
                "i": images[1],
                "j": images[2],
                "k": images[3],
            }))?;
            Ok(Outcome::Ok)
        }
    }
}

/// A value, or the reason it is undefined; `hard` marks failures of computability.
fn field<T: Serialize>(r: Result<T, CsaError>, hard: &mut bool) -> Value {
    match r {
        Ok(v) => json!(v),
        Err(e @ (CsaError::E0Nonzero | CsaError::E1Nonzero | CsaError::NotOrthogonal)) => json!(e.to_string()),
        Err(e) => {
            *hard = true;
            json!(e.to_string())
        }
    }
}

pub fn inv(file: &Path) -> CmdResult {
    let a: InvolutionAlgebra =
        serde_json::from_slice(&read(file)?).map_err(|e| format!("{}: {e}", file.display()))?;
    let mut hard = false;
    let kind = match a.kind() {
        InvolutionType::Orthogonal => "orthogonal",
        InvolutionType::Symplectic => "symplectic",
    };
    let degree = a.degree().map_err(err)?;
    let e0 = field(a.e0(), &mut hard);
    let e1 = field(a.e1(), &mut hard);
    let e2 = field(a.e2().map(|p| p.to_string()), &mut hard);
    let pfister = if degree <= 8 {
        field(a.is_pfister_involution(), &mut hard)
    } else {
        json!(format!("undefined: degree {degree}"))
    };
    print_json(&json!({
        "degree": degree,
        "type": kind,
        "brauer_class": a.brauer_class().map_err(err)?,
        "e0": e0,
        "e1": e1,
        "e2": e2,
        "pfister": pfister,
    }))?;
    Ok((!hard).into())
}

fn write_json(path: Option<&Path>, v: &impl Serialize) -> Result<(), String> {
    if let Some(p) = path {
        let mut s = serde_json::to_string_pretty(v).map_err(err)?;
        s.push('\n');
        fs::write(p, s).map_err(|e| format!("{}: {e}", p.display()))?;
    }
    Ok(())
}

fn shapiro_err(e: ShapiroError) -> String {
    e.to_string()
}

fn report_failures(batch: &BatchReport) {
    for r in batch.scenarios.iter().filter(|r| !r.verdict.pass) {
        eprintln!(
            "seed {}: {}",
            r.scenario.seed,
            r.verdict.failures.first().map_or("failed", String::as_str)
        );
    }
}

pub fn shapiro4(cmd: ShapiroCommand) -> CmdResult {
    match cmd {
        ShapiroCommand::Run { count, seed, json } => {
            let batch = shapiro4::run_batch(count, seed);
            out_raw!("{}", batch.summary_table());
            write_json(json.as_deref(), &batch)?;
            report_failures(&batch);
            Ok(batch.all_passed().into())
        }
        ShapiroCommand::Verify { file, json } => {
            let raw = read(&file)?;
            let sc: Scenario = serde_json::from_slice(&raw).map_err(|e| format!("{}: {e}", file.display()))?;
            let report = shapiro4::run_scenario(&sc).map_err(shapiro_err)?;
            let batch = BatchReport {
                version: pfister_core::VERSION.into(),
                input_hash: shapiro4::input_hash(&raw),
                seed: sc.seed,
                count: 1,
                scenarios: vec![report],
            };
            out_raw!("{}", batch.summary_table());
            write_json(json.as_deref(), &batch)?;
            report_failures(&batch);
            Ok(batch.all_passed().into())
        }
        ShapiroCommand::VerifyU { file, json } => {
            let raw = read(&file)?;
            let input: UInput = serde_json::from_slice(&raw).map_err(|e| format!("{}: {e}", file.display()))?;
            let rep = shapiro4::verify_u(&input, &raw).map_err(shapiro_err)?;
            let r = &rep.report;
            out!("u validated: symmetric, Trd_D(u) = 0, Nrd_D(u) = {} is a square", format_rational(&rep.u.nrd));
            for c in &r.claims {
                out!("{}: {} ({} checks)", c.name, if c.passed { "ok" } else { "FAIL" }, c.checks);
            }
            if let Some(w) = &r.witt {
                out!("witt index: {}", w.witt_index);
            }
            out!("isotropic subspace dimension: {}", r.isotropic_subspace.len());
            out!("{}", if r.verdict.pass { "PASS" } else { "FAIL" });
            for f in &r.verdict.failures {
                eprintln!("{f}");
            }
            write_json(json.as_deref(), &rep)?;
            Ok(r.verdict.pass.into())
        }
    }
}
