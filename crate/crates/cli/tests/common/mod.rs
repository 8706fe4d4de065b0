#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_knnclust"))
}

/// Runs the CLI with `THREADS` set, panicking with stderr on failure.
pub fn run_with_threads(threads: &str, args: &[&str]) -> Output {
    let out = bin().env("THREADS", threads).args(args).output().unwrap();
    assert!(
        out.status.success(),
        "knnclust {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

pub fn run(args: &[&str]) -> Output {
    run_with_threads("max", args)
}

pub fn fails(args: &[&str]) -> String {
    let out = bin().args(args).output().unwrap();
    assert!(!out.status.success(), "knnclust {args:?} unexpectedly succeeded");
    String::from_utf8_lossy(&out.stderr).into_owned()
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

pub fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn schema_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas")
}

fn load_schema(name: &str) -> Value {
    read_json(&schema_dir().join(name))
}

pub fn search_validator() -> jsonschema::Validator {
    jsonschema::validator_for(&load_schema("search_result.schema.json")).unwrap()
}

pub fn report_validator() -> jsonschema::Validator {
    let registry = jsonschema::Registry::new()
        .add("urn:knnclust:schema:search-result", load_schema("search_result.schema.json"))
        .unwrap()
        .prepare()
        .unwrap();
    jsonschema::options()
        .with_registry(&registry)
        .build(&load_schema("eval_report.schema.json"))
        .unwrap()
}

pub fn assert_valid(v: &jsonschema::Validator, doc: &Value) {
    let errors: Vec<String> = v.iter_errors(doc).map(|e| format!("{} at {}", e, e.instance_path())).collect();
    assert!(errors.is_empty(), "schema violations: {errors:#?}");
}
