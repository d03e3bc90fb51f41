use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kuga-satake"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn run_stdin(args: &[&str], input: &str) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("bad JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

#[test]
fn classify_division_quaternion() {
    let out = run(&["classify", "--diag", "-1,-1,3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["matrix_size"], 1);
    assert_eq!(v["center"], "Q");
    assert_eq!(v["split"], false);
    assert_eq!(v["quaternion"]["ram"], serde_json::json!(["2", "3"]));
    assert_eq!(v["assumes_generic"], true);
    assert_eq!(v["isogeny"]["summary"], "simple abelian surface");
}

#[test]
fn classify_split_and_weil_type() {
    let v = json(&run(&["classify", "--diag", "-1,-1,1"]));
    assert_eq!(v["split"], true);
    assert_eq!(v["isogeny"]["summary"], "product of two isogenous elliptic curves");

    let v = json(&run(&["classify", "--diag", "-1,-1,1,1,1,3"]));
    assert_eq!(v["matrix_size"], 2);
    assert_eq!(v["center"], "Q(sqrt -3)");
    assert_eq!(v["split"], true);
}

#[test]
fn classify_from_stdin_and_file() {
    let out = run_stdin(&["classify"], r#"{"diag": ["3", "-1", "-1"]}"#);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["form"]["diag"], serde_json::json!(["-1", "-1", "3"]));

    let dir = std::env::temp_dir().join(format!("ks-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("form.json");
    std::fs::write(&path, r#"{"gram": [["-1", "0", "0"], ["0", "-1", "0"], ["0", "0", "1/4"]]}"#).unwrap();
    let v = json(&run(&["classify", "--form", path.to_str().unwrap()]));
    assert_eq!(v["split"], true);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["classify", "--diag", "-1,zz"]).status.code(), Some(2));
    assert_eq!(run_stdin(&["classify"], "{not json").status.code(), Some(2));
    assert_eq!(run(&["classify", "--diag", "-1,0,1"]).status.code(), Some(3));
    assert_eq!(run_stdin(&["classify"], r#"{"gram": [["1","1"],["1","1"]]}"#).status.code(), Some(3));
    // not of signature (2-, (n-2)+)
    assert_eq!(run(&["report", "--diag", "-1,1,1"]).status.code(), Some(3));
    assert_eq!(
        run(&["report", "--diag", "-1,-1,1", "--plane-v", "1,0,0", "--plane-w", "0,0,1"]).status.code(),
        Some(3)
    );
    assert_eq!(run(&["hodge-verify", "--diag", "-2,-3,5", "--tolerance", "1e-18"]).status.code(), Some(4));
}

#[test]
fn report_aligned_equals_zero_parameters() {
    let a = run(&["report", "--diag", "-1,-1,1"]);
    let b = run(&["report", "--diag", "-1,-1,1", "--params-a", "0", "--params-b", "0"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["ks_dim"], 2);
    assert_eq!(v["period_matrix"].as_array().unwrap().len(), 2);
    assert_eq!(v["period_matrix"][0].as_array().unwrap().len(), 4);
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
}

#[test]
fn report_random_planes_pass_and_are_reproducible() {
    for seed in 0..10 {
        let s = seed.to_string();
        let args = ["report", "--diag", "-1,-2,3,1", "--random-plane", "--seed", &s];
        let first = run(&args);
        assert_eq!(first.status.code(), Some(0), "seed {seed}");
        assert_eq!(first.stdout, run(&args).stdout, "seed {seed}");
    }
}

#[test]
fn plane_from_json_input() {
    let input = r#"{"diag": ["-1", "-1", "1", "1"], "plane": {"a": [0.1, 0.2], "b": [-0.2, 0.1]}}"#;
    let out = run_stdin(&["hodge-verify"], input);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["pass"], true);
    assert!(v["checks"].as_array().unwrap().iter().any(|c| c["name"] == "riemann_relation"));
}

#[test]
fn config_file_and_output() {
    let dir = std::env::temp_dir().join(format!("ks-cfg-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.toml");
    std::fs::write(&cfg, "tolerance = 1e-8\nwitness_height = 20\n").unwrap();
    let out_path = dir.join("out.json");
    let out = run(&[
        "selftest",
        "--criterion",
        "2",
        "--config",
        cfg.to_str().unwrap(),
        "--output",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(v["pass"], true);
    assert_eq!(v["config"]["witness_height"], 20);

    std::fs::write(&cfg, "tolerance = -1\n").unwrap();
    assert_eq!(run(&["selftest", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    std::fs::write(&cfg, "bogus_key = 1\n").unwrap();
    assert_eq!(run(&["selftest", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn selftest_restricted_oracle_and_overtight_tolerance() {
    let out = run(&["selftest", "--criterion", "3", "--oracle-bound", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&["selftest", "--criterion", "6", "--tolerance", "1e-17"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("closed_form"));
}
