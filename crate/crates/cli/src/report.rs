//! JSONL records and artifact files in the output directory.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::json;

use crate::config::{ExperimentConfig, Tolerances};
use crate::suites::SuiteOutput;

/// --out, then NORMSOL_OUT, then the config, then ./normsol-out.
pub fn output_dir(flag: Option<PathBuf>, cfg: &ExperimentConfig) -> PathBuf {
    flag.or_else(|| std::env::var_os("NORMSOL_OUT").map(PathBuf::from))
        .or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("normsol-out"))
}

pub fn write(dir: &Path, suite: &str, hash: &str, tol: &Tolerances, out: &SuiteOutput) -> std::io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(format!("{suite}.jsonl"));
    let mut f = fs::File::create(&path)?;
    for r in &out.records {
        let line = json!({
            "suite": r.suite,
            "name": r.name,
            "config_hash": hash,
            "tolerances": tol,
            "required": r.required,
            "pass": r.pass,
            "data": r.data,
        });
        writeln!(f, "{line}")?;
    }
    for (name, bytes) in &out.files {
        fs::write(dir.join(name), bytes)?;
    }
    Ok(path)
}
