#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use jsonschema::JSONSchema;
use serde_json::Value;

pub fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn scenario_path(name: &str) -> PathBuf {
    crate_dir().join("scenarios").join(format!("{name}.json"))
}

pub fn schema(name: &str) -> JSONSchema {
    let path = crate_dir().join("schemas").join(format!("{name}.schema.json"));
    let text = std::fs::read_to_string(&path).unwrap();
    let value: Value = serde_json::from_str(&text).unwrap();
    JSONSchema::compile(&value).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// Panics with every validation message.
pub fn assert_valid(schema_name: &str, value: &Value) {
    let s = schema(schema_name);
    if let Err(errors) = s.validate(value) {
        let msgs: Vec<String> = errors.map(|e| format!("{} at {}", e, e.instance_path)).collect();
        panic!("{schema_name} schema rejects instance:\n{}", msgs.join("\n"));
    };
}

pub fn read_json(path: &Path) -> Value {
    let text = std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    serde_json::from_str(&text).unwrap()
}

pub fn ramcf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ramcf"))
        .args(args)
        .env_remove("RAMCF_PRECISION_BITS")
        .output()
        .expect("binary runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}
