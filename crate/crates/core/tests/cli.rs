use std::process::Command;

fn dproc(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_dproc")).args(args).env("DPROC_WORKERS", "2").output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn predict_at_zero_edges() {
    let (code, out, _) = dproc(&["predict", "--n", "1000", "--d", "3", "--s", "0"]);
    assert_eq!(code, 0);
    assert!(out.contains("ell_inverse=0 "));
    assert!(out.contains("beta_0=1000 "));
}

#[test]
fn predict_json_lines() {
    let (code, out, _) = dproc(&["predict", "--n", "10000", "--d", "3", "--x", "0,10000", "--t", "10", "--json"]);
    assert_eq!(code, 0);
    let lines: Vec<serde_json::Value> = out.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0]["ell"], 0.0);
    assert!((lines[1]["beta_1"].as_f64().unwrap() - 10000.0 * (-1.0f64).exp()).abs() < 1e-9);
    assert!(lines[2]["f_1"].as_f64().unwrap() > 0.0);
}

#[test]
fn oracle_queries() {
    let (code, out, _) = dproc(&["oracle", "--n", "4", "--d", "2", "--query", "nonsat"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("4/15 "));
    let (code, out, _) = dproc(&["oracle", "--n", "4", "--d", "2", "--query", "terminal"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().filter(|l| l.starts_with("1/15 ")).count(), 4);
    let (code, out, _) = dproc(&["oracle", "--n", "4", "--d", "2", "--query", "degrees", "--s", "4", "--json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    assert_eq!(v["reach_probability"]["numerator"], "11");
    assert_eq!(v["reach_probability"]["denominator"], "15");
}

#[test]
fn run_saturation_on_two_vertices() {
    let (code, out, _) = dproc(&["run", "--kind", "saturation", "--n", "2", "--d", "2", "--trials", "10", "--seed", "1"]);
    assert_eq!(code, 0);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some(dprocess::harness::REPORT_CSV_HEADER));
    let row: Vec<&str> = lines.find(|l| l.contains(",nonsat,")).unwrap().split(',').collect();
    assert_eq!(row[8], "1");
    assert_eq!(row[12], "10");
}

#[test]
fn run_from_config_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("exp.json");
    std::fs::write(&path, r#"{"kind": "badballs", "n": 200, "d": 2, "trials": 5, "checkpoints_t": [1, 10]}"#).unwrap();
    let out_path = dir.path().join("trials.jsonl");
    let (code, out, err) = dproc(&[
        "run",
        "--config",
        path.to_str().unwrap(),
        "--trials",
        "7",
        "--output",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains(",bad_unsaturated_mean,10,"));
    let text = std::fs::read_to_string(out_path).unwrap();
    assert_eq!(text.lines().count(), 9);
}

#[test]
fn exit_codes() {
    assert_eq!(dproc(&["--help"]).0, 0);
    for sub in ["run", "oracle", "predict"] {
        let (code, out, _) = dproc(&[sub, "--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("Usage"));
    }
    let (code, _, err) = dproc(&["run", "--nope"]);
    assert_eq!(code, 1);
    assert!(err.contains("Usage"));
    assert_eq!(dproc(&["frobnicate"]).0, 1);
    assert_eq!(dproc(&["run", "--kind", "saturation", "--trials", "0"]).0, 1);
    assert_eq!(dproc(&["oracle", "--n", "9", "--d", "3", "--query", "nonsat", "--budget", "10"]).0, 2);
    assert_eq!(dproc(&["run", "--config", "/definitely/missing.json"]).0, 2);
}
