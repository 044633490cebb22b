use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use pfister_core::linalg;
use pfister_core::quat::QuaternionAlgebra;
use pfister_core::shapiro4::{Scenario, UInput, DIM};

fn pfister(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pfister"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn tmp(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

#[test]
fn qf_invariants_of_the_hyperbolic_plane() {
    let o = pfister(&["qf", "invariants", "--diag", "1,-1"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["dim"], 2);
    assert_eq!(v["disc"], "1");
    assert_eq!(v["signature"], 0);
}

#[test]
fn qf_pfister_answers_through_the_exit_code() {
    let yes = pfister(&["qf", "pfister", "--r", "2", "--diag", "1,1,1,1"]);
    assert_eq!(yes.status.code(), Some(0));
    assert_eq!(stdout(&yes).trim(), "true");
    let no = pfister(&["qf", "pfister", "--r", "2", "--diag", "1,1,1,-7"]);
    assert_eq!(no.status.code(), Some(1));
    assert_eq!(stdout(&no).trim(), "false");
}

#[test]
fn qf_witt_and_isometric() {
    let o = pfister(&["qf", "witt", "--diag", "1,-1,2,-2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["witt_index"], 2);
    let iso = pfister(&["qf", "isometric", "1,1", "2,2"]);
    assert_eq!(iso.status.code(), Some(0));
    let not = pfister(&["qf", "isometric", "1,1", "1,3"]);
    assert_eq!(not.status.code(), Some(1));
}

#[test]
fn form_files_are_accepted() {
    let path = tmp("form.json");
    fs::write(&path, r#"{"gram": [["0", "1"], ["1", "0"]]}"#).unwrap();
    let o = pfister(&["qf", "witt", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&o)["witt_index"], 1);
}

#[test]
fn quaternion_commands() {
    let hamilton = pfister(&["quat", "split", "-1", "-1"]);
    assert_eq!(hamilton.status.code(), Some(1));
    assert_eq!(json(&hamilton)["split"], false);
    let split = pfister(&["quat", "split", "1", "5"]);
    assert_eq!(split.status.code(), Some(0));
    let norm = pfister(&["quat", "normform", "2", "3"]);
    assert_eq!(json(&norm)["diag"], serde_json::json!(["1", "-2", "-3", "6"]));
    let map = pfister(&["quat", "splitmap", "1", "5"]);
    assert_eq!(map.status.code(), Some(0));
    assert!(json(&map)["i"].is_array());
}

#[test]
fn invalid_input_exits_with_two() {
    assert_eq!(pfister(&["quat", "split", "0", "1"]).status.code(), Some(2));
    assert_eq!(pfister(&["qf", "invariants", "--diag", "1,0"]).status.code(), Some(2));
    assert_eq!(pfister(&["qf", "invariants", "--diag", "x"]).status.code(), Some(2));
    assert_eq!(pfister(&["nonsense"]).status.code(), Some(2));
    assert_eq!(pfister(&["--help"]).status.code(), Some(0));
}

#[test]
fn inv_invariants_of_a_canonical_pair() {
    let path = tmp("pair.json");
    let factor = r#"{"quaternion": {"algebra": {"a": "-1", "b": "-1"}, "involution": "canonical"}}"#;
    fs::write(&path, format!(r#"{{"factors": [{factor}, {factor}]}}"#)).unwrap();
    let o = pfister(&["inv", "invariants", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v["degree"], 4);
    assert_eq!(v["type"], "orthogonal");
    assert_eq!(v["e1"], "1");
    assert_eq!(v["pfister"], true);
}

#[test]
fn shapiro4_run_is_deterministic() {
    let (a, b) = (tmp("run_a.json"), tmp("run_b.json"));
    let first = pfister(&["shapiro4", "run", "--count", "2", "--seed", "7", "--json", a.to_str().unwrap()]);
    let second = pfister(&["shapiro4", "run", "--count", "2", "--seed", "7", "--json", b.to_str().unwrap()]);
    assert_eq!(first.status.code(), Some(0));
    assert!(stdout(&first).contains("2/2 scenarios passed"));
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn shapiro4_verify_a_scenario_file() {
    let path = tmp("scenario.json");
    fs::write(&path, serde_json::to_string_pretty(&Scenario::sample(7)).unwrap()).unwrap();
    let o = pfister(&["shapiro4", "verify", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("1/1 scenarios passed"));
}

#[test]
fn shapiro4_verify_u_rejects_an_invalid_u() {
    let path = tmp("bad_u.json");
    let input = UInput {
        q1: QuaternionAlgebra::from_i64(-1, -1).unwrap(),
        q2: QuaternionAlgebra::from_i64(2, 3).unwrap(),
        u: linalg::unit_vector(DIM, 0),
        c: None,
    };
    fs::write(&path, serde_json::to_string(&input).unwrap()).unwrap();
    let o = pfister(&["shapiro4", "verify-u", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Trd"));
}
