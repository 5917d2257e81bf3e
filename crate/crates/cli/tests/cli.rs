use std::path::{Path, PathBuf};
use std::process::Command;

use eppa_cli::instance::parse_instance;
use eppa_cli::{cmd_extend, cmd_oracle, cmd_verify, Flags, Status};
use serde_json::Value;

const E1: &str = r#"{"kind":"metric","payload":{"points":["x","y"],"d":[["0","1"],["1","0"]],"partial_isometries":[{"map":{"x":"y"}}]}}"#;

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_eppa")).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn e1_extend_and_verify() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "e1.json", E1);
    let out = dir.path().join("e1.out.json");
    let (code, _, _) = run(&["extend", s(&inst), "--budget-order", "100", "--out", s(&out)]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["result"]["classes"].as_array().unwrap().len(), 3);
    assert_eq!(v["result"]["group_order"], 3);
    let (code, stdout, _) = run(&["verify", s(&inst), s(&out)]);
    assert_eq!(code, 0, "{stdout}");
}

#[test]
fn bad_triangle_is_invalid_input() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "bad.json", r#"{"points":["a","b","c"],"d":[[0,1,3],[1,0,1],[3,1,0]]}"#);
    let (code, stdout, _) = run(&["extend", s(&inst)]);
    assert_eq!(code, 2);
    let v: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["status"], "invalid-input");
    assert!(v["error"].as_str().unwrap().contains("(a, b, c)"));
}

#[test]
fn forced_budget_names_last_degree() {
    let hard = r#"{"points":["a","b","c","d"],"d":[[0,1,2,"3/2"],[1,0,1,2],[2,1,0,1],["3/2",2,1,0]],
        "partial_isometries":[{"map":{"a":"b","b":"c"}},{"map":{"a":"d","c":"b"}}]}"#;
    let out = cmd_extend(
        hard,
        &Flags {
            budget_order: Some(2),
            ..Flags::default()
        },
    );
    assert_eq!(out.status, Status::BudgetExhausted);
    assert_eq!(out.exit_code(), 3);
    assert!(out.report["error"].as_str().unwrap().contains("degrees up to 6"));
}

#[test]
fn corrupted_entry_is_caught() {
    let out = cmd_extend(E1, &Flags::default());
    let mut v = out.report.clone();
    v["result"]["d_y"][0][2] = Value::String("2".into());
    let rep = cmd_verify(E1, &v.to_string(), &Flags::default());
    assert_eq!(rep.exit_code(), 5);
    let msg = rep.report["verification"]["failures"][0].as_str().unwrap().to_string();
    assert!(msg.contains("(0, 2)"), "{msg}");

    // a corrupted base row contradicts the chain values
    let mut v = out.report.clone();
    v["result"]["base_rows"][0][1] = Value::String("1/2".into());
    let rep = cmd_verify(E1, &v.to_string(), &Flags::default());
    assert_eq!(rep.exit_code(), 5);
}

#[test]
fn wrong_pairing_is_invalid_input() {
    let out = cmd_extend(E1, &Flags::default());
    let other = r#"{"points":["x","y"],"d":[["0","2"],["2","0"]],"partial_isometries":[{"map":{"x":"y"}}]}"#;
    let rep = cmd_verify(other, &out.render(), &Flags::default());
    assert_eq!(rep.exit_code(), 2);
    let malg = r#"{"cells":{"a":"1/2","b":"1/2"}}"#;
    assert_eq!(cmd_verify(malg, &out.render(), &Flags::default()).exit_code(), 2);
}

#[test]
fn oracle_depths() {
    let full = cmd_oracle(E1, &Flags::default());
    assert_eq!(full.exit_code(), 0);
    assert_eq!(full.report["oracle"]["disagree"], 0);
    assert_eq!(full.report["oracle"]["inconclusive"], 0);
    let none = cmd_oracle(
        E1,
        &Flags {
            oracle_depth: Some(0),
            ..Flags::default()
        },
    );
    assert_eq!(none.exit_code(), 0);
    assert_eq!(none.report["oracle"]["warning"], true);
    assert_eq!(none.report["oracle"]["agree"], 0);
    for e in none.report["oracle"]["signatures"].as_array().unwrap() {
        assert_eq!(e["status"], "inconclusive");
    }
    let malg = r#"{"cells":{"a":"1/2","b":"1/2"}}"#;
    assert_eq!(cmd_oracle(malg, &Flags::default()).exit_code(), 2);
}

#[test]
fn mixed_discriminants_rejected() {
    let text = r#"{"cells":{"a":"1/4*sqrt(2)","b":"1/4*sqrt(3)","c":"1/2"}}"#;
    assert!(parse_instance(text).is_err());
    assert_eq!(cmd_extend(text, &Flags::default()).exit_code(), 2);
}

#[test]
fn envelope_and_kind_inference_agree() {
    let bare = r#"{"points":["x","y"],"d":[["0","1"],["1","0"]],"partial_isometries":[{"map":{"x":"y"}}]}"#;
    assert_eq!(parse_instance(bare).unwrap().digest, parse_instance(E1).unwrap().digest);
    assert!(parse_instance(r#"{"kind":"metric","payload":{"points":[],"d":[]},"extra":1}"#).is_err());
    assert!(parse_instance(r#"{"nothing":1}"#).is_err());
}

#[test]
fn malg_round_trip_and_tamper() {
    let text = r#"{"cells":{"a":"1/4*sqrt(2)","b":"1/4*sqrt(2)","c":"1/4","d":"3/4-1/2*sqrt(2)"}}"#;
    let out = cmd_extend(text, &Flags::default());
    assert_eq!(out.exit_code(), 0, "{}", out.render());
    assert_eq!(cmd_verify(text, &out.render(), &Flags::default()).exit_code(), 0);
    // a cell renamed away from its parent has no ancestry
    let mut v = out.report.clone();
    let cells = v["result"]["refined"]["cells"].as_object_mut().unwrap();
    let (k, m) = cells.iter().next().map(|(k, m)| (k.clone(), m.clone())).unwrap();
    cells.remove(&k);
    cells.insert("zz".into(), m);
    let atoms = v["result"]["refined"]["atoms"].as_array_mut().unwrap();
    for a in atoms.iter_mut() {
        for c in a.as_array_mut().unwrap() {
            if c.as_str() == Some(&k) {
                *c = Value::String("zz".into());
            }
        }
    }
    assert_eq!(cmd_verify(text, &v.to_string(), &Flags::default()).exit_code(), 5);
}

#[test]
fn hilbert_round_trip_and_tamper() {
    let text = r#"{"dim":3,"map":{"domain":[[1,0,0]],"images":[[0,1,0]]},"amalgam":{"a":[[1,0,0]],"b":[[1,0,0],[0,1,1]],"c":[[1,0,0]]}}"#;
    let out = cmd_extend(text, &Flags::default());
    assert_eq!(out.exit_code(), 0, "{}", out.render());
    assert_eq!(cmd_verify(text, &out.render(), &Flags::default()).exit_code(), 0);
    let mut v = out.report.clone();
    v["result"]["witt"]["matrix"][2][2] = Value::String("2".into());
    assert_eq!(cmd_verify(text, &v.to_string(), &Flags::default()).exit_code(), 5);
    let tight = r#"{"dim":2,"amalgam":{"a":[[1,0]],"b":[[0,1]]}}"#;
    assert_eq!(cmd_extend(tight, &Flags::default()).exit_code(), 0);
    // too little room is invalid input
    let none = r#"{"dim":2,"amalgam":{"a":[[1,0],[0,1]],"b":[[0,1]]}}"#;
    assert_eq!(cmd_extend(none, &Flags::default()).exit_code(), 2);
}

#[test]
fn irrational_norm_adjoins_a_root() {
    // the copy of (0,1,1) needs norm 2, so sqrt(2) enters the result
    let text = r#"{"dim":3,"amalgam":{"a":[[1,0,0]],"b":[[1,0,0],[0,1,1]],"c":[[1,0,0]]}}"#;
    let out = cmd_extend(text, &Flags::default());
    assert_eq!(out.exit_code(), 0);
    assert_eq!(out.report["result"]["amalgam"]["d"][0][2], "0+1*sqrt(2)");
}
