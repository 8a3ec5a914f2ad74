//! Run reports and the files written for them.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

/// Overrides the output directory of every subcommand.
pub const OUT_DIR_ENV: &str = "CUBESHIFT_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "cubeshift-out";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Svg,
    Txt,
}

/// What a subcommand computed, before anything is written.
#[derive(Debug, Default)]
pub struct Computed {
    pub results: Value,
    pub warnings: Vec<String>,
    /// False when the run completed but its check or certificate failed.
    pub passed: bool,
    pub table: Option<Table>,
    pub plot: Option<String>,
    pub text: Option<String>,
    /// Printed on stdout.
    pub summary: String,
}

#[derive(Debug)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

/// The JSON file written by every run. Timings are printed, not stored, so
/// equal inputs give byte-identical files.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunReport {
    pub command: String,
    pub version: String,
    pub inputs: Value,
    pub results: Value,
    pub passed: bool,
    pub warnings: Vec<String>,
}

/// Flag, then environment, then config file, then the default.
pub fn resolve_out_dir(flag: Option<&Path>, config: Option<&str>) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    if let Some(p) = std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()) {
        return PathBuf::from(p);
    }
    PathBuf::from(config.unwrap_or(DEFAULT_OUT_DIR))
}

/// `<command>-<first 12 hex digits of sha256(command, inputs)>`.
pub fn stem(command: &str, inputs: &Value) -> String {
    let key = serde_json::to_vec(&serde_json::json!({ "command": command, "inputs": inputs })).expect("json value");
    let digest = Sha256::digest(&key);
    let hex: String = digest.iter().take(6).map(|b| format!("{b:02x}")).collect();
    format!("{command}-{hex}")
}

pub fn to_json_bytes(report: &RunReport) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(report)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Writes the JSON report and whichever of CSV, SVG and text were asked for
/// and produced. Returns the paths written.
pub fn emit(command: &str, inputs: Value, c: &Computed, dir: &Path, formats: &[Format]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
    let name = stem(command, &inputs);
    let report = RunReport {
        command: command.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        inputs,
        results: c.results.clone(),
        passed: c.passed,
        warnings: c.warnings.clone(),
    };
    let mut written = Vec::new();
    let json = dir.join(format!("{name}.json"));
    write(&json, &to_json_bytes(&report)?)?;
    written.push(json);

    if formats.contains(&Format::Csv) {
        if let Some(t) = &c.table {
            let path = dir.join(format!("{name}.csv"));
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&t.header)?;
            for row in &t.rows {
                w.write_record(row)?;
            }
            write(&path, &w.into_inner().context("flushing csv")?)?;
            written.push(path);
        }
    }
    if formats.contains(&Format::Svg) {
        if let Some(svg) = &c.plot {
            let path = dir.join(format!("{name}.svg"));
            write(&path, svg.as_bytes())?;
            written.push(path);
        }
    }
    if formats.contains(&Format::Txt) {
        if let Some(text) = &c.text {
            let path = dir.join(format!("{name}.txt"));
            write(&path, text.as_bytes())?;
            written.push(path);
        }
    }
    Ok(written)
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}
