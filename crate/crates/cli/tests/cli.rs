use serde_json::Value;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twistorlab")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid json")
}

fn summary_flag(doc: &Value, i: u64, key: &str) -> bool {
    doc["summary"].as_array().unwrap().iter().find(|r| r["i"] == i).unwrap()[key]["value"].as_bool().unwrap()
}

#[test]
fn projective_plane_first_structure_at_root_two() {
    let doc = json(&["report", "--surface", "cp2_fs", "--connection", "lichnerowicz", "--lambda", "1.4142", "--points", "5"]);
    assert!(summary_flag(&doc, 1, "symplectic"));
    assert!(!summary_flag(&doc, 2, "symplectic"));
    assert_eq!(doc["schema"], 1);
    assert_eq!(doc["seed"], 1);
    assert_eq!(doc["report"]["points"].as_array().unwrap().len(), 5);
}

#[test]
fn flat_chern_third_structure() {
    let doc = json(&["report", "--surface", "flat_c2", "--connection", "chern", "--lambda", "1"]);
    assert!(summary_flag(&doc, 3, "symplectic"));
    assert!(summary_flag(&doc, 3, "integrable"));
}

#[test]
fn general_gauduchon_has_no_formula_fields() {
    let doc = json(&["report", "--surface", "hopf", "--connection", "gauduchon", "--t", "0.5", "--lambda", "1"]);
    for r in doc["summary"].as_array().unwrap() {
        assert!(r["max_dk_residual"].is_null());
    }
    for p in doc["report"]["points"].as_array().unwrap() {
        for r in p["records"].as_array().unwrap() {
            assert!(r["dk_residual"].is_null() && r["balanced_residual"].is_null());
            assert!(r["symplectic"]["defect"].as_f64().unwrap() > 0.0);
        }
    }
}

#[test]
fn output_is_byte_stable_and_atomic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let base = ["report", "--surface", "ch2", "--connection", "chern", "--lambda", "0.5", "--lambda", "2", "--seed", "9"];
    for path in [&a, &b] {
        let mut args = base.to_vec();
        args.extend(["--out", path.to_str().unwrap()]);
        assert!(run(&args).status.success());
    }
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    let text = String::from_utf8(ta).unwrap();
    assert!(text.contains("\"seed\": 9"));
    // 17 significant digits in scientific form
    assert!(text.contains("\"t\": 1.0000000000000000e0"));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 2);
}

#[test]
fn thread_cap_does_not_change_output() {
    let args = ["report", "--surface", "hopf", "--connection", "bismut", "--lambda", "1"];
    let one = Command::new(env!("CARGO_BIN_EXE_twistorlab")).args(args).env("TWISTORLAB_THREADS", "1").output().unwrap();
    let many = run(&args);
    assert!(one.status.success());
    assert_eq!(one.stdout, many.stdout);
    let bad = Command::new(env!("CARGO_BIN_EXE_twistorlab")).args(args).env("TWISTORLAB_THREADS", "zero").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["report", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["report", "--surface", "nowhere", "--connection", "chern"]).status.code(), Some(2));
    assert_eq!(run(&["report", "--surface", "hopf", "--connection", "gauduchon"]).status.code(), Some(2));
    assert_eq!(run(&["report", "--surface", "hopf", "--connection", "chern", "--t", "1"]).status.code(), Some(2));
    assert_eq!(run(&["report", "--surface", "hopf", "--connection", "chern", "--lambda", "-1"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--suite", "nonsense"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let surf = dir.path().join("twisted.surf");
    // symmetric, positive, but not J-invariant
    std::fs::write(
        &surf,
        "coords x1 x2 x3 x4\ndomain x1 -1 1\ndomain x2 -1 1\ndomain x3 -1 1\ndomain x4 -1 1\n\
         g 1 1 = 2\ng 2 2 = 1\ng 3 3 = 1\ng 4 4 = 1\nJ standard\n",
    )
    .unwrap();
    let out = run(&["report", "--surface", surf.to_str().unwrap(), "--connection", "chern"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("J-invariant"));
}

#[test]
fn surface_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let surf = dir.path().join("flat.surf");
    std::fs::write(
        &surf,
        "coords x1 x2 x3 x4\ndomain x1 -1 1\ndomain x2 -1 1\ndomain x3 -1 1\ndomain x4 -1 1\nJ standard\n",
    )
    .unwrap();
    let doc = json(&["report", "--surface", surf.to_str().unwrap(), "--connection", "chern", "--lambda", "1"]);
    assert!(summary_flag(&doc, 3, "symplectic"));
    let out = run(&["report", "--surface", surf.to_str().unwrap(), "--params", "c=2", "--connection", "chern"]);
    assert_eq!(out.status.code(), Some(2));
    let doc = json(&["report", "--surface", "cp2_fs", "--params", "c=4", "--connection", "chern", "--lambda", "1"]);
    assert!(summary_flag(&doc, 1, "symplectic"));
    assert_eq!(doc["surface"]["params"], serde_json::json!([["c", 4.0]]));
    assert_eq!(run(&["report", "--surface", "cp2_fs", "--params", "c", "--connection", "chern"]).status.code(), Some(2));
}

#[test]
fn verify_suites() {
    let out = run(&["verify", "--suite", "appendix", "--format", "text"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("criterion 1 [PASS]"));
    let doc = json(&["verify", "--suite", "algebra"]);
    assert_eq!(doc["passed"], true);
    let strict = run(&["verify", "--suite", "oracle", "--tol", "1e-30"]);
    assert_eq!(strict.status.code(), Some(1));
    let doc: Value = serde_json::from_slice(&strict.stdout).unwrap();
    assert_eq!(doc["passed"], false);
}

#[test]
fn scans() {
    let doc = json(&[
        "scan", "--surface", "cp2_fs", "--connection", "lichnerowicz", "--i", "1", "--lambda-min", "1", "--lambda-max", "2",
        "--steps", "11",
    ]);
    let zeros = doc["scans"][0]["zeros"].as_array().unwrap();
    assert_eq!(zeros.len(), 1);
    assert!((zeros[0].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-6);
    let doc = json(&["scan", "--surface", "cp2_fs", "--connection", "lichnerowicz", "--i", "2"]);
    assert!(doc["scans"][0]["zeros"].as_array().unwrap().is_empty());
    let defects: Vec<f64> =
        doc["scans"][0]["rows"].as_array().unwrap().iter().map(|r| r["symplectic_defect"].as_f64().unwrap()).collect();
    assert!(defects.windows(2).all(|w| w[1] > w[0]));
    let doc = json(&["scan", "--surface", "flat_c2", "--connection", "chern", "--i", "3"]);
    assert_eq!(doc["scans"][0]["identically_zero"], true);
    let empty = run(&["scan", "--surface", "flat_c2", "--connection", "chern", "--steps", "1"]);
    assert_eq!(empty.status.code(), Some(2));
}

#[test]
fn appendix_table() {
    let doc = json(&["appendix", "--lambda", "1.4142135623730951"]);
    let first = &doc["structures"][0];
    assert_eq!(first["dk_coefficient"], "0");
    assert_eq!(first["symplectic"], true);
    assert_eq!(doc["structures"][1]["one_two_symplectic"], true);
    assert!(doc["structures"][1]["ddbar_matches_display"].is_null());
    assert_eq!(doc["integrable_structures"], serde_json::json!([1, 3, 4, 5, 7, 8]));
    assert_eq!(doc["normalization"]["flag_critical_lambda_sq"], "2");
    assert!((doc["normalization"]["twistor_critical_lambda_sq"].as_f64().unwrap() - 2.0).abs() < 1e-6);
    let half = json(&["appendix", "--lambda1", "0.7071067811865476", "--lambda2", "0.7071067811865476", "--lambda3", "0.7071067811865476"]);
    assert_eq!(half["lambda_sq"], serde_json::json!(["1/2", "1/2", "1/2"]));
    assert_eq!(half["nearly_kahler"]["dk_minus_three_re_rho"], 0.0);
}
