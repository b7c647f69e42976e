//! CSV tables and the run manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use tempered::experiments::{ReplicateTable, SelectionRow, SummaryCurve};

use crate::CliError;

/// Shortest decimal string that parses back to the same `f64`.
/// Infinities are written `inf` / `-inf`.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let magnitude = x.abs();
    if magnitude != 0.0 && !(1e-5..1e16).contains(&magnitude) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

pub const SWEEP_HEADER: &str = "n,tau,mean,q05,q95,scaled,degenerate_fraction";
pub const REPLICATES_HEADER: &str = "n,replicate,tau,value";
pub const SELECTION_HEADER: &str = "n,replicate,tau_star,elpd_at_star,lower_flag,upper_flag";

pub fn sweep_csv(curve: &SummaryCurve) -> String {
    let mut out = format!("{SWEEP_HEADER}\n");
    for p in &curve.points {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            p.n,
            num(p.tau),
            num(p.mean),
            num(p.q05),
            num(p.q95),
            flag(curve.scaled),
            num(p.degenerate_fraction)
        );
    }
    out
}

pub fn replicates_csv(table: &ReplicateTable) -> String {
    let mut out = format!("{REPLICATES_HEADER}\n");
    for r in &table.rows {
        let _ = writeln!(out, "{},{},{},{}", r.n, r.replicate, num(r.tau), num(r.value));
    }
    out
}

pub fn selection_csv(rows: &[SelectionRow]) -> String {
    let mut out = format!("{SELECTION_HEADER}\n");
    for r in rows {
        let s = &r.selection;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.n,
            r.replicate,
            num(s.tau_star),
            num(s.elpd_at_star),
            flag(s.at_lower_boundary),
            flag(s.at_upper_boundary)
        );
    }
    out
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub root_seed: u64,
    /// Resolved configuration with every default filled in.
    pub config: serde_json::Value,
    /// The same configuration as a config file that reproduces the run.
    pub config_toml: Option<String>,
    pub files: Vec<String>,
    pub runtime_seconds: f64,
}

/// Collects output files and writes them, plus `manifest.json`, into one directory.
pub struct OutputDir {
    dir: PathBuf,
    files: Vec<String>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<OutputDir, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Internal(format!("cannot create {}: {e}", dir.display())))?;
        Ok(OutputDir { dir: dir.to_path_buf(), files: Vec::new() })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| CliError::Internal(format!("cannot write {}: {e}", path.display())))?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn finish(mut self, mut manifest: Manifest) -> Result<(), CliError> {
        self.files.push("manifest.json".into());
        manifest.files = self.files.clone();
        let json = serde_json::to_string_pretty(&manifest)
            .map_err(|e| CliError::Internal(format!("cannot serialize manifest: {e}")))?;
        self.write("manifest.json", &(json + "\n"))
    }
}
