//! CSV tables and the per-run manifest.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// One CSV file held in memory until the run finishes.
#[derive(Clone, Debug)]
pub struct Table {
    pub name: String,
    /// Header layout tag, bumped whenever columns change.
    pub schema: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, schema: &str, header: &[&'static str]) -> Self {
        Self {
            name: name.into(),
            schema: schema.into(),
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len(), "{}", self.name);
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        Ok(w.into_inner().map_err(|e| e.into_error())?)
    }
}

/// Shortest round-trip decimal form; empty for missing values.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x}")
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

#[derive(Clone, Debug, Serialize)]
pub struct OutputRecord {
    pub file: String,
    pub schema: String,
    pub rows: usize,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub preset: Option<String>,
    pub seed: u64,
    pub threads: usize,
    pub realizations: usize,
    pub scenario_file: String,
    pub scenario_sha256: String,
    pub started_unix_seconds: u64,
    pub wall_clock_seconds: f64,
    pub warnings: Vec<String>,
    pub outputs: Vec<OutputRecord>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Everything a command produced.
#[derive(Clone, Debug, Default)]
pub struct RunOutput {
    pub tables: Vec<Table>,
    pub warnings: BTreeSet<String>,
}

impl RunOutput {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }
}

/// Writes every table, the resolved scenario and `manifest.json` into `dir`.
pub fn write_run(dir: &Path, out: &RunOutput, mut manifest: Manifest, scenario_toml: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for t in &out.tables {
        let bytes = t.to_csv()?;
        let path = dir.join(&t.name);
        fs::write(&path, &bytes).with_context(|| format!("writing {}", path.display()))?;
        manifest.outputs.push(OutputRecord {
            file: t.name.clone(),
            schema: t.schema.clone(),
            rows: t.rows.len(),
            sha256: sha256_hex(&bytes),
        });
    }
    manifest.scenario_file = "scenario.toml".into();
    manifest.scenario_sha256 = sha256_hex(scenario_toml.as_bytes());
    fs::write(dir.join("scenario.toml"), scenario_toml)?;
    manifest.warnings = out.warnings.iter().cloned().collect();
    let path = dir.join("manifest.json");
    fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(path)
}
