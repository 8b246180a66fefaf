use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const COIN_MODEL: &str = r#"{
  "theta": ["t1", "t2"],
  "inputs": ["a", "b"],
  "labels": [0, 1],
  "prior": ["1/2", "1/2"],
  "supervisors": [
    [["9/10", "1/10"], ["1/10", "9/10"]],
    [["1/2", "1/2"], ["1/2", "1/2"]]
  ]
}"#;

const UNIT_GP: &str = r#"{"kernel": {"family": "squared-exponential", "length_scale": 1, "amplitude": 1}, "noise_var": 1}"#;

fn probmorph(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_probmorph"))
        .args(args)
        .output()
        .unwrap()
}

fn put(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).unwrap()
}

#[test]
fn posterior_of_the_coin_model() {
    let dir = TempDir::new().unwrap();
    let model = put(&dir, "model.json", COIN_MODEL);
    let data = put(&dir, "s.json", r#"[["a", 1]]"#);
    let out = probmorph(&["posterior", "--input", s(&model), "--data", s(&data)]);
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(
        doc["posterior"]["weights"],
        serde_json::json!(["1/6", "5/6"])
    );
    assert_eq!(doc["null_evidence"], Value::Bool(false));
}

#[test]
fn predictive_of_the_coin_model() {
    let dir = TempDir::new().unwrap();
    let model = put(&dir, "model.json", COIN_MODEL);
    let data = put(&dir, "s.json", r#"[["a", 1]]"#);
    let test = put(&dir, "t.json", r#"["b"]"#);
    let output = dir.path().join("pred.json");
    let out = probmorph(&[
        "predictive",
        "--input",
        s(&model),
        "--data",
        s(&data),
        "--test",
        s(&test),
        "--output",
        s(&output),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&fs::read_to_string(&output).unwrap()).unwrap();
    assert_eq!(
        doc["marginals"][0]["weights"],
        serde_json::json!(["13/30", "17/30"])
    );
}

#[test]
fn invert_emits_null_points() {
    let dir = TempDir::new().unwrap();
    let model = put(
        &dir,
        "bayes.json",
        r#"{"theta": [0, 1], "observations": ["u", "v", "w"], "prior": ["1/4", "3/4"],
            "sampling": [["1/2", "1/2", "0"], ["1/3", "2/3", "0"]]}"#,
    );
    for backend in ["rational", "float"] {
        let out = probmorph(&["invert", "--input", s(&model), "--backend", backend]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(doc["null_points"], serde_json::json!(["w"]));
        assert_eq!(doc["backend"], backend);
    }
}

#[test]
fn gp_predict_single_point() {
    let dir = TempDir::new().unwrap();
    let gp = put(&dir, "gp.json", UNIT_GP);
    let train = put(&dir, "train.csv", "x,y\n0,1\n");
    let test = put(&dir, "test.csv", "x\n0\n");
    let output = dir.path().join("pred.csv");
    let out = probmorph(&[
        "gp-predict",
        "--input",
        s(&gp),
        "--data",
        s(&train),
        "--test",
        s(&test),
        "--output",
        s(&output),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(&output).unwrap();
    assert_eq!(
        csv,
        "test_x,posterior_mean,posterior_std\n0,0.5,0.70710678118654757\n"
    );
    let cov: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("pred.cov.json")).unwrap())
            .unwrap();
    assert!((cov["cov"][0][0].as_f64().unwrap() - 0.5).abs() <= 1e-12);
}

#[test]
fn singular_gp_is_a_numerical_error_unless_jittered() {
    let dir = TempDir::new().unwrap();
    let gp = put(
        &dir,
        "gp.json",
        r#"{"kernel": {"family": "squared-exponential", "length_scale": 1, "amplitude": 1}, "noise_var": 0}"#,
    );
    let train = put(&dir, "train.csv", "0,1\n0,1\n");
    let test = put(&dir, "test.csv", "0.5\n");
    let output = dir.path().join("pred.csv");
    let base = [
        "gp-predict",
        "--input",
        s(&gp),
        "--data",
        s(&train),
        "--test",
        s(&test),
        "--output",
        s(&output),
    ];
    let out = probmorph(&base);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stderr_json(&out)["error"]["kind"], "numerical");

    let mut jittered = base.to_vec();
    jittered.extend(["--jitter", "1e-6"]);
    assert_eq!(probmorph(&jittered).status.code(), Some(0));
}

#[test]
fn malformed_input_is_a_schema_error() {
    let dir = TempDir::new().unwrap();
    let data = put(&dir, "s.json", r#"[["a", 1]]"#);
    for bad in [
        r#"{"theta": 1}"#,
        "not json",
        r#"{"theta": ["t"], "inputs": ["a"], "labels": [0], "prior": ["1/2"], "supervisors": [[["1"]]]}"#,
    ] {
        let model = put(&dir, "model.json", bad);
        let out = probmorph(&["posterior", "--input", s(&model), "--data", s(&data)]);
        assert_eq!(out.status.code(), Some(2), "{bad}");
        assert_eq!(stderr_json(&out)["error"]["exit_code"], 2);
    }
    let out = probmorph(&[
        "posterior",
        "--input",
        "/nonexistent/model.json",
        "--data",
        s(&data),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = probmorph(&["check-laws", "--tolerance", "-1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gp_predict_refuses_the_rational_backend() {
    let out = probmorph(&["gp-predict", "--backend", "rational"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for (out, backend) in [(&a, "float"), (&b, "float")] {
        let status = probmorph(&[
            "check-laws",
            "--seed",
            "9",
            "--trials",
            "25",
            "--backend",
            backend,
            "--output",
            s(out),
        ]);
        assert_eq!(status.status.code(), Some(0));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn emitted_documents_reparse_to_equal_values() {
    let dir = TempDir::new().unwrap();
    let model = put(&dir, "model.json", COIN_MODEL);
    let data = put(&dir, "s.json", r#"[["a", 1], ["b", 0]]"#);
    let output = dir.path().join("post.json");
    probmorph(&[
        "posterior",
        "--input",
        s(&model),
        "--data",
        s(&data),
        "--output",
        s(&output),
        "--backend",
        "float",
    ]);
    let text = fs::read_to_string(&output).unwrap();
    let doc = probmorph::json::parse_value(&text).unwrap();
    assert_eq!(probmorph::json::to_canonical_string(&doc), text);
    let m = probmorph::json::measure_from_json::<f64>(&doc["posterior"]).unwrap();
    assert_eq!(probmorph::json::measure_to_json(&m), doc["posterior"]);
}

#[test]
fn check_laws_gates_on_failures() {
    let ok = probmorph(&["check-laws", "--seed", "42", "--trials", "30"]);
    assert_eq!(ok.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(report["total_failures"], 0);

    let broken = probmorph(&[
        "check-laws",
        "--seed",
        "42",
        "--trials",
        "30",
        "--inject-fault",
        "posterior",
    ]);
    assert_eq!(broken.status.code(), Some(4));
    let report: Value = serde_json::from_slice(&broken.stdout).unwrap();
    assert!(report["total_failures"].as_u64().unwrap() > 0);
    let failing = report["laws"]
        .as_array()
        .unwrap()
        .iter()
        .find(|l| l["failures"].as_u64().unwrap() > 0)
        .unwrap();
    assert!(!failing["counterexamples"].as_array().unwrap().is_empty());
}
