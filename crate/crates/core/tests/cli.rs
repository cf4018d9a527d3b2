mod common;

use std::fs;
use std::process::Command;

use common::{assert_valid, ramcf, read_json, scenario_path, stdout};
use tempfile::TempDir;

fn out(dir: &TempDir, sub: &str) -> String {
    dir.path().join(sub).to_string_lossy().into_owned()
}

fn code(o: &std::process::Output) -> i32 {
    o.status.code().expect("exit code")
}

fn decimal_line(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(key))
        .unwrap_or_else(|| panic!("no `{key}` in {text}"))
        .trim()
        .parse()
        .unwrap()
}

#[test]
fn eval_constant_one_cycles() {
    let tmp = TempDir::new().unwrap();
    let dir = out(&tmp, "one");
    let o = ramcf(&["eval", "--constant", "1", "--out-dir", &dir]);
    assert_eq!(code(&o), 0, "{o:?}");
    assert!(stdout(&o).contains("DivergedPeriodic(3)"));
    let csv = fs::read_to_string(tmp.path().join("one/trace.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,tau_real,cayley_angle"));
    // τ_2 = T_1(T_1(0)) = T_1(-1) = ∞
    let second: Vec<&str> = lines.nth(1).unwrap().split(',').collect();
    assert_eq!(&second[..2], ["2", "inf"]);
    let report = read_json(&tmp.path().join("one/report.json"));
    assert_eq!(report["verdict"]["period"], 3);
    assert_valid("report", &report);
}

#[test]
fn eval_constant_converges_to_fixed_point() {
    let tmp = TempDir::new().unwrap();
    let o = ramcf(&["eval", "--constant", "0.2", "--out-dir", &out(&tmp, "c")]);
    assert_eq!(code(&o), 0);
    let limit = decimal_line(&stdout(&o), "limit:");
    assert!((limit - (-1.0 + 0.2f64.sqrt()) / 2.0).abs() < 1e-12);
}

#[test]
fn eval_errors_and_undecided() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(
        code(&ramcf(&["eval", "--constant", "0", "--out-dir", &out(&tmp, "z")])),
        1
    );
    // ρ(2) is irrational: no cycle, no convergence
    let o = ramcf(&[
        "eval",
        "--constant",
        "2",
        "--max-n",
        "1000",
        "--out-dir",
        &out(&tmp, "u"),
    ]);
    assert_eq!(code(&o), 2);
    assert!(tmp.path().join("u/report.json").exists());
}

#[test]
fn eval_explicit_file() {
    let tmp = TempDir::new().unwrap();
    let values: Vec<String> = (0..600).map(|_| "0.2".to_string()).collect();
    let file = tmp.path().join("coeffs.txt");
    fs::write(&file, values.join("\n")).unwrap();
    let o = ramcf(&[
        "eval",
        "--explicit",
        file.to_str().unwrap(),
        "--out-dir",
        &out(&tmp, "e"),
    ]);
    assert_eq!(code(&o), 0, "{o:?}");
    let trace = fs::read_to_string(tmp.path().join("e/trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 601);
}

#[test]
fn usage_errors() {
    assert_eq!(code(&ramcf(&["eval"])), 64);
    assert_eq!(code(&ramcf(&["eval", "--constant", "1", "--scenario", "x.json"])), 64);
    assert_eq!(code(&ramcf(&["eval", "--constant", "1", "--no-such-flag"])), 64);
    assert_eq!(code(&ramcf(&["frobnicate"])), 64);
    assert_eq!(code(&ramcf(&["construct"])), 64);
    let help = ramcf(&["--help"]);
    assert_eq!(code(&help), 0);
    for flag in ["--precision-bits", "--seed", "--out-dir"] {
        assert!(stdout(&help).contains(flag));
    }
}

#[test]
fn rho_and_inverse() {
    let o = ramcf(&["rho", "--a", "1"]);
    assert_eq!(code(&o), 0);
    let v: f64 = stdout(&o).trim().parse().unwrap();
    assert!((v - 1.0 / 3.0).abs() < 1e-15);
    let o = ramcf(&["rho", "--inverse", "0.25"]);
    let v: f64 = stdout(&o).trim().parse().unwrap();
    assert!((v - 0.5).abs() < 1e-15);
    assert_eq!(code(&ramcf(&["rho", "--a", "0.25"])), 1);
    assert_eq!(code(&ramcf(&["rho", "--inverse", "0.5"])), 1);
}

#[test]
fn classify_prints_json() {
    let o = ramcf(&["classify", "--b", "0.2"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["class"], "hyperbolic");
    assert!(v["attractor"].is_string());
    let o = ramcf(&["classify", "--b", "0.25"]);
    assert!(stdout(&o).contains("parabolic"));
    let o = ramcf(&["classify", "--b", "1", "--power", "3"]);
    assert!(stdout(&o).contains("identity"));
    let o = ramcf(&["classify", "--matrix", "2,0,0,1"]);
    assert!(stdout(&o).contains("hyperbolic"));
    assert_eq!(code(&ramcf(&["classify", "--matrix", "1,1"])), 1);
}

#[test]
fn construct_rational_passes_and_geometric_fails() {
    let tmp = TempDir::new().unwrap();
    let dir = out(&tmp, "h");
    let o = ramcf(&["construct", "--mode", "rational", "--out-dir", &dir]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    for f in [
        "trace.csv",
        "report.json",
        "artifact.json",
        "certificate.json",
        "timing.json",
    ] {
        assert!(tmp.path().join("h").join(f).exists(), "{f}");
    }
    assert_valid("certificate", &read_json(&tmp.path().join("h/certificate.json")));

    let dir = out(&tmp, "g");
    let o = ramcf(&[
        "construct",
        "--mode",
        "rational",
        "--t-rule",
        "geometric",
        "--out-dir",
        &dir,
    ]);
    assert_eq!(code(&o), 3);
    let diag = read_json(&tmp.path().join("g/diagnostic.json"));
    assert_eq!(diag["certificate_passes"], false);
    assert!(!diag["failing"].as_array().unwrap().is_empty());
    assert!(stdout(&o).contains("\"failing\""));
}

#[test]
fn construct_rejects_mismatched_mode() {
    let path = scenario_path("rational_harmonic");
    let o = ramcf(&[
        "construct",
        "--mode",
        "irrational",
        "--scenario",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 64);
}

#[test]
fn construct_irrational_golden() {
    let tmp = TempDir::new().unwrap();
    let path = scenario_path("irrational_golden");
    let o = ramcf(&[
        "construct",
        "--mode",
        "irrational",
        "--scenario",
        path.to_str().unwrap(),
        "--out-dir",
        &out(&tmp, "i"),
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let cert = read_json(&tmp.path().join("i/certificate.json"));
    assert_eq!(cert["kind"], "irrational");
    assert_eq!(cert["check"]["schedule"].as_array().unwrap().len(), 3);
    assert_valid("certificate", &cert);
}

#[test]
fn gill_profiles() {
    let tmp = TempDir::new().unwrap();
    let o = ramcf(&["gill", "--a", "1", "--rule", "2^-i", "--out-dir", &out(&tmp, "s")]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("DivergedPeriodic(3)"));
    let gill = read_json(&tmp.path().join("s/gill.json"));
    assert_eq!(gill["summable_heuristic"], true);
    assert_valid("gill", &gill);

    let o = ramcf(&[
        "gill",
        "--a",
        "1",
        "--rule",
        "0",
        "--max-n",
        "600",
        "--out-dir",
        &out(&tmp, "z"),
    ]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("DivergedPeriodic(3)"));

    let o = ramcf(&[
        "gill",
        "--a",
        "1",
        "--rule",
        "1/i",
        "--lemma",
        "--out-dir",
        &out(&tmp, "l"),
    ]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(
        text.contains("summable: false") && text.contains("verdict: Converged"),
        "{text}"
    );

    // ρ(2) is irrational, so there are no lemma coefficients
    assert_eq!(code(&ramcf(&["gill", "--a", "2", "--rule", "1/i", "--lemma"])), 1);
    assert_eq!(code(&ramcf(&["gill", "--a", "1", "--rule", "sometimes"])), 1);
}

#[test]
fn compare_and_batch() {
    let tmp = TempDir::new().unwrap();
    let batch = scenario_path("baseline_contrast");
    let root = out(&tmp, "batch");
    let o = ramcf(&["batch", batch.to_str().unwrap(), "--out-dir", &root]);
    assert_eq!(code(&o), 0, "{o:?}");
    for name in ["constant", "gill", "rational"] {
        assert!(tmp.path().join("batch").join(name).join("artifact.json").exists());
    }
    let table = read_json(&tmp.path().join("batch/comparison.json"));
    assert_valid("comparison", &table);
    let verdicts: Vec<&str> = table["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["verdict"].as_str().unwrap())
        .collect();
    assert_eq!(verdicts, ["DivergedPeriodic(3)", "DivergedPeriodic(3)", "Converged"]);

    let a = tmp.path().join("batch/constant");
    let b = tmp.path().join("batch/rational/artifact.json");
    let o = ramcf(&[
        "compare",
        a.to_str().unwrap(),
        b.to_str().unwrap(),
        "--out-dir",
        &out(&tmp, "cmp"),
    ]);
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(tmp.path().join("cmp/comparison.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert_eq!(stdout(&o), csv);

    assert_eq!(code(&ramcf(&["compare", a.to_str().unwrap()])), 64);
    assert_eq!(
        code(&ramcf(&["compare", a.to_str().unwrap(), "/no/such/artifact.json"])),
        1
    );
}

#[test]
fn batch_reports_failed_scenarios() {
    let tmp = TempDir::new().unwrap();
    let file = tmp.path().join("mixed.json");
    fs::write(
        &file,
        r#"[{"mode": "constant", "a": "0.2"}, {"mode": "constant", "a": "-1"}]"#,
    )
    .unwrap();
    let o = ramcf(&["batch", file.to_str().unwrap(), "--out-dir", &out(&tmp, "m")]);
    assert_eq!(code(&o), 1);
    assert!(tmp.path().join("m/constant-0/report.json").exists());
}

#[test]
fn precision_precedence() {
    let tmp = TempDir::new().unwrap();
    let scenario = tmp.path().join("s.json");
    fs::write(
        &scenario,
        r#"{"mode": "constant", "a": "0.2", "precision_bits": 192, "eval": {"max_n": 600}}"#,
    )
    .unwrap();
    let run = |env: Option<&str>, flag: Option<&str>, input: &[&str], sub: &str| {
        let dir = out(&tmp, sub);
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_ramcf"));
        cmd.env_remove("RAMCF_PRECISION_BITS");
        if let Some(e) = env {
            cmd.env("RAMCF_PRECISION_BITS", e);
        }
        cmd.arg("eval").args(input).args(["--out-dir", &dir]);
        if let Some(f) = flag {
            cmd.args(["--precision-bits", f]);
        }
        assert!(cmd.output().unwrap().status.success());
        read_json(&tmp.path().join(sub).join("artifact.json"))["environment"]["precision_bits"].clone()
    };
    let constant = ["--constant", "0.2", "--max-n", "600"];
    let file = ["--scenario", scenario.to_str().unwrap()];
    assert_eq!(run(None, None, &constant, "a"), 256);
    assert_eq!(run(Some("128"), None, &constant, "b"), 128);
    assert_eq!(run(Some("128"), Some("512"), &constant, "c"), 512);
    assert_eq!(run(Some("128"), None, &file, "d"), 192);
    assert_eq!(run(Some("128"), Some("512"), &file, "e"), 512);
    assert_eq!(code(&ramcf(&["rho", "--a", "1", "--precision-bits", "8"])), 1);
    let o = Command::new(env!("CARGO_BIN_EXE_ramcf"))
        .env("RAMCF_PRECISION_BITS", "lots")
        .args(["rho", "--a", "1"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}
