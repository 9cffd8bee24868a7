use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use mhk::mps::MatrixPowerSeries;
use serde_json::Value;

fn mhk(args: &[&str], stdin: &str, threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mhk"));
    cmd.args(args).stdin(Stdio::piped()).stdout(Stdio::piped()).stderr(Stdio::piped());
    match threads {
        Some(t) => cmd.env("MHK_THREADS", t),
        None => cmd.env_remove("MHK_THREADS"),
    };
    let mut child = cmd.spawn().expect("binary runs");
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("mhk-cli");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

const SERIES: &str = r#"{"p":2,"order":2,"coeffs":[
  {"rows":2,"cols":2,"data":[[0.3,0.0],[0.1,0.0],[0.0,0.0],[0.2,0.1]]},
  {"rows":2,"cols":2,"data":[[0.1,0.0],[0.0,0.0],[0.0,0.2],[0.1,0.0]]},
  {"rows":2,"cols":2,"data":[[0.05,0.0],[0.0,0.0],[0.0,0.0],[0.05,0.0]]}]}"#;

#[test]
fn same_seed_gives_identical_bytes() {
    let args = ["--seed", "17", "schur", "counterexample"];
    let a = mhk(&args, "", Some("1"));
    let b = mhk(&args, "", Some("4"));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = mhk(&["--seed", "18", "schur", "counterexample"], "", None);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn stdin_and_out_file() {
    let out = scratch("inv.json");
    let _ = std::fs::remove_file(&out);
    let r = mhk(&["series", "inv", "--out", out.to_str().unwrap()], SERIES, None);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    assert!(r.stdout.is_empty());
    let inv: MatrixPowerSeries = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let f: MatrixPowerSeries = serde_json::from_str(SERIES).unwrap();
    let prod = f.star_mul_trunc(&inv, 2).unwrap();
    for (k, c) in prod.coeffs().iter().enumerate() {
        let target = if k == 0 { 1.0 } else { 0.0 };
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { target } else { 0.0 };
                assert!((c[(i, j)].re - want).abs() < 1e-12 && c[(i, j)].im.abs() < 1e-12);
            }
        }
    }
}

#[test]
fn series_json_round_trips() {
    let path = scratch("f.json");
    std::fs::write(&path, SERIES).unwrap();
    let r = mhk(&["series", "mul", "--g", path.to_str().unwrap()], SERIES, None);
    assert_eq!(r.status.code(), Some(0));
    let text = String::from_utf8(r.stdout).unwrap();
    let prod: MatrixPowerSeries = serde_json::from_str(&text).unwrap();
    let again = serde_json::to_string_pretty(&prod).unwrap();
    let (x, y): (Value, Value) = (serde_json::from_str(&text).unwrap(), serde_json::from_str(&again).unwrap());
    assert_eq!(x, y);
}

#[test]
fn exit_codes() {
    let ok = mhk(&["schur", "check"], r#"{"p":1,"order":0,"coeffs":[{"rows":1,"cols":1,"data":[[0.5,0.0]]}]}"#, None);
    assert_eq!(ok.status.code(), Some(0));

    let fail = mhk(&["schur", "check"], r#"{"p":1,"order":0,"coeffs":[{"rows":1,"cols":1,"data":[[1.5,0.0]]}]}"#, None);
    assert_eq!(fail.status.code(), Some(1));
    let w: Value = serde_json::from_slice(&fail.stdout).unwrap();
    assert_eq!(w["verdict"], "Fail");

    let bad = mhk(&["series", "inv"], "{\"p\": 1,\n\"order\": ", None);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("line 2"));

    assert_eq!(mhk(&["nope"], "", None).status.code(), Some(2));
}

#[test]
fn thread_cap_is_validated() {
    assert_eq!(mhk(&["schur", "counterexample"], "", Some("zero")).status.code(), Some(2));
    assert_eq!(mhk(&["schur", "counterexample"], "", Some("0")).status.code(), Some(2));
    assert_eq!(mhk(&["schur", "counterexample"], "", Some("2")).status.code(), Some(0));
}

#[test]
fn verify_all_subset() {
    let r = mhk(&["verify-all", "--only", "1", "--only", "2"], "", None);
    assert_eq!(r.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&r.stdout).unwrap();
    assert_eq!(report["pass"], true);
    assert_eq!(report["criteria"].as_array().unwrap().len(), 2);
    assert!(String::from_utf8_lossy(&r.stderr).contains("[PASS]"));
}
