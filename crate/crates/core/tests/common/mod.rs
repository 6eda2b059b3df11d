#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_certain"))
}

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Run {
    pub fn json(&self) -> Value {
        serde_json::from_str(&self.stdout).unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", self.stdout))
    }
}

pub fn run(args: &[&str]) -> Run {
    let Output { status, stdout, stderr } = bin().args(args).output().expect("spawn certain");
    Run {
        code: status.code().expect("exit code"),
        stdout: String::from_utf8(stdout).unwrap(),
        stderr: String::from_utf8(stderr).unwrap(),
    }
}

pub fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

pub fn schema_validator() -> jsonschema::Validator {
    let text = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/report.schema.json")).unwrap();
    let schema: Value = serde_json::from_str(&text).unwrap();
    jsonschema::validator_for(&schema).expect("schema compiles")
}

/// Validation errors of `report`, empty when valid.
pub fn schema_errors(v: &jsonschema::Validator, report: &Value) -> Vec<String> {
    v.iter_errors(report).map(|e| format!("{} at {}", e, e.instance_path)).collect()
}

pub fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data")
}

// Fixture CSVs.
pub const LINREG_EXISTS: &str = "a,b,y\n1,NA,2\n2,3,4\n";
pub const LINREG_NOT_EXISTS: &str = "a,b,y\n1,NA,1\n2,1,3\n";
pub const LINSVM_EXISTS: &str = "a,b,y\n-2,0,-1\n2,0,1\n5,NA,1\n";
pub const LINSVM_NOT_EXISTS: &str = "a,b,y\n-2,0,-1\n2,0,1\n1,NA,1\n";
pub const RBF_UNKNOWN: &str = "a,b,y\n-1,0,-1\n1,0,1\n0.2,NA,1\n";
pub const ARCCOS_TWO_MISSING: &str = "a,b,c,y\n1,0,0,1\n0,1,0,-1\nNA,NA,1,1\n";
pub const ARCCOS_EXISTS: &str = "a,b,c,y\n1,0,0,1\n0,1,0,1\n0,0,1,1\n1,1,NA,1\n";
pub const COMPLETE: &str = "a,b,y\n1,2,3\n4.5,-1,0.25\n0,7,-2\n";
