mod common;

use std::fs;

use common::{assert_valid, crate_dir, read_json, schema};
use ramcf::report::{compare, run, write_outputs, EvalSpec, RhoForm, Scenario, SourceSpec};
use serde_json::{json, Value};
use tempfile::TempDir;

fn shipped() -> Vec<(String, Value)> {
    let mut out: Vec<(String, Value)> = fs::read_dir(crate_dir().join("scenarios"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), read_json(&p)))
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

#[test]
fn shipped_scenarios_validate_and_parse() {
    let files = shipped();
    assert!(files.len() >= 7);
    for (name, value) in files {
        let items = match value {
            Value::Array(items) => items,
            one => vec![one],
        };
        for item in items {
            assert_valid("scenario", &item);
            let parsed = Scenario::from_json(&item.to_string()).unwrap_or_else(|e| panic!("{name}: {e}"));
            let back: Value = serde_json::from_str(&parsed.to_json().unwrap()).unwrap();
            assert_valid("scenario", &back);
        }
    }
}

#[test]
fn scenario_schema_rejects_malformed_input() {
    let s = schema("scenario");
    for bad in [
        json!({ "a": "1" }),
        json!({ "mode": "constant", "a": 1.0 }),
        json!({ "mode": "constant", "a": "one" }),
        json!({ "mode": "rational", "p": 1, "q": 2, "t_rule": "harmonic" }),
        json!({ "mode": "irrational", "rho": { "form": "quadratic", "p": -3, "q": -2, "d": 5 }, "stages": 3, "r_max": "sometimes" }),
        json!({ "mode": "gill", "a": "1", "rule": "0", "precision_bits": 16 }),
    ] {
        assert!(!s.is_valid(&bad), "accepted {bad}");
    }
}

fn small(s: Scenario) -> Scenario {
    s.with_eval(EvalSpec {
        max_n: 1200,
        ..EvalSpec::default()
    })
}

fn emitted(s: &Scenario) -> (TempDir, Vec<String>) {
    let tmp = TempDir::new().unwrap();
    let outcome = run(s).unwrap();
    write_outputs(&outcome, tmp.path()).unwrap();
    let mut names: Vec<String> = fs::read_dir(tmp.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    (tmp, names)
}

fn check_outputs(s: &Scenario) -> Vec<String> {
    let (tmp, names) = emitted(s);
    for name in &names {
        if let Some(stem) = name.strip_suffix(".json") {
            assert_valid(stem, &read_json(&tmp.path().join(name)));
        }
    }
    names
}

#[test]
fn every_mode_emits_valid_json() {
    let mut rational = small(Scenario::rational(1, 3, "harmonic"));
    if let SourceSpec::Rational { certify_stages, .. } = &mut rational.source {
        *certify_stages = Some(120);
    }
    let explicit = Scenario::new(SourceSpec::Explicit {
        values: vec!["0.2".into(); 600],
        limit: Some("0.2".into()),
    });
    let names = check_outputs(&small(Scenario::constant("1")));
    assert_eq!(names, ["artifact.json", "report.json", "timing.json", "trace.csv"]);
    check_outputs(&small(Scenario::gill("1", "1/i^2")));
    check_outputs(&explicit);
    let names = check_outputs(&rational);
    assert!(names.contains(&"certificate.json".to_string()));
    let names = check_outputs(&Scenario::irrational(RhoForm::golden(), 2));
    assert!(names.contains(&"certificate.json".to_string()));
}

#[test]
fn comparison_validates() {
    let arts: Vec<_> = [Scenario::constant("1"), Scenario::constant("0.2")]
        .iter()
        .map(|s| run(&small(s.clone())).unwrap().artifact)
        .collect();
    let table = serde_json::to_value(compare(&arts).unwrap()).unwrap();
    assert_valid("comparison", &table);
}

#[test]
fn floats_are_strings() {
    let outcome = run(&small(Scenario::constant("0.2"))).unwrap();
    let mut value = serde_json::to_value(&outcome.artifact).unwrap();
    assert!(value["report"]["limit_estimate"].is_string());
    value["report"]["limit_estimate"] = json!(-0.276);
    assert!(!schema("artifact").is_valid(&value));
}
