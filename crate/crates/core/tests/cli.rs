//! End-to-end tests of the `multipoly` binary.

use std::fs;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_multipoly"))
}

#[test]
fn gen_diagonal_writes_three_terms() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("diag.json");
    let status = bin()
        .args(["gen", "diagonal", "--n", "3", "--M", "2", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["terms"].as_array().unwrap().len(), 3);
    assert_eq!(v["degrees"], serde_json::json!([1, 1]));
}

#[test]
fn gen_ksz_is_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        let status = bin()
            .args(["gen", "ksz", "--n", "4", "--degrees", "1,1", "--seed", "7", "--out"])
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    let ta = fs::read_to_string(&a).unwrap();
    assert_eq!(ta, fs::read_to_string(&b).unwrap());
    let v: serde_json::Value = serde_json::from_str(&ta).unwrap();
    assert_eq!(v["terms"].as_array().unwrap().len(), 16);
}

#[test]
fn gen_ksz_over_budget_fails() {
    let out = bin()
        .args(["gen", "ksz", "--n", "4096", "--degrees", "1,1,1,1"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));
}

#[test]
fn norm_exact_diagonal_is_n() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("diag.json");
    assert!(bin()
        .args(["gen", "diagonal", "--n", "3", "--M", "2", "--out"])
        .arg(&f)
        .status()
        .unwrap()
        .success());
    let out = bin()
        .args(["norm", "--file"])
        .arg(&f)
        .args(["--p", "inf", "--exact"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["value"], serde_json::json!(3.0));
    assert_eq!(v["method"], serde_json::json!("vertex_exact"));
}

#[test]
fn norm_rejects_small_p() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("diag.json");
    assert!(bin()
        .args(["gen", "diagonal", "--n", "2", "--M", "2", "--out"])
        .arg(&f)
        .status()
        .unwrap()
        .success());
    let out = bin()
        .args(["norm", "--file"])
        .arg(&f)
        .args(["--p", "0.5"])
        .output()
        .unwrap();
    assert!(!out.status.success());
}

#[test]
fn eval_and_fold_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("diag.json");
    let folded = dir.path().join("folded.json");
    assert!(bin()
        .args(["gen", "diagonal", "--n", "2", "--M", "2", "--out"])
        .arg(&f)
        .status()
        .unwrap()
        .success());
    let out = bin()
        .args(["eval", "--file"])
        .arg(&f)
        .args(["--point", "1,1;1,-1"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: f64 = String::from_utf8_lossy(&out.stdout).trim().parse().unwrap();
    assert_eq!(v, 0.0);

    assert!(bin()
        .args(["fold", "--file"])
        .arg(&f)
        .arg("--out")
        .arg(&folded)
        .status()
        .unwrap()
        .success());
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&folded).unwrap()).unwrap();
    assert_eq!(v["degrees"], serde_json::json!([2]));
    assert_eq!(v["dims"], serde_json::json!([4]));
    assert_eq!(v["terms"].as_array().unwrap().len(), 2);
}

#[test]
fn sweep_writes_reproducible_csv_with_fit_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"family":"diagonal","degrees":[1,1],"p":3.0,"s":2.0,"n_grid":[2,4,8,16]}"#,
    )
    .unwrap();
    let out1 = dir.path().join("a.csv");
    let out2 = dir.path().join("b.csv");
    for out in [&out1, &out2] {
        assert!(bin()
            .args(["sweep", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(out)
            .status()
            .unwrap()
            .success());
    }
    let a = fs::read_to_string(&out1).unwrap();
    assert_eq!(a, fs::read_to_string(&out2).unwrap());
    assert!(a.starts_with("# config="));
    assert!(a.contains("family,degrees,M,p,s,n,seed,coeff_value,norm_value,norm_method,ratio,wall_time_ms"));
    let last = a.lines().last().unwrap();
    assert!(last.starts_with("# slope="), "got {last}");
    assert!(last.contains("verdict=consistent"));
    // slope = 1/6 with closed-form norms.
    assert!(last.contains("slope=1.6666666666666"));
}

#[test]
fn exponents_prints_regime_and_values() {
    let out = bin().args(["exponents", "--M", "2", "--p", "4"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("regime=high_p"));
    assert!(text.contains("hl_exponent_high=2.0000000000000000e0"));
    assert!(text.contains("hl_exponent_low=2.0000000000000000e0"));

    let out = bin().args(["exponents", "--M", "2", "--p", "inf"]).output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("hl_exponent_high=1.3333333333333333e0"));
    assert!(text.contains("hl_exponent_low=n/a"));
    assert!(text.contains("ksz_exponent=1.5000000000000000e0"));
}
