//! Command pipelines, JSON/CSV reports and the run configuration.

pub mod cache;
pub mod commands;
pub mod config;

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::verdict::{Status, Verdict};

pub use cache::{SpectrumCache, CACHE_ENV};
pub use commands::{run_command, Command, RunContext};
pub use config::{RunConfig, SCHEMA_VERSION};

/// The published JSON schema for `BoundReport`, shipped with the crate.
pub const REPORT_SCHEMA: &str = include_str!("../../schemas/bound_report.schema.json");
/// The published JSON schema for the run configuration (TOML parsed to JSON).
pub const CONFIG_SCHEMA: &str = include_str!("../../schemas/run_config.schema.json");

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Budgets {
    pub tol_disc: Option<f64>,
    pub tol_q: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub quantity: String,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableSummary {
    pub file: String,
    pub columns: Vec<String>,
    pub rows: usize,
}

/// Non-deterministic fields; everything outside this block is reproducible.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_ms: f64,
    pub cache_hits: u64,
    pub cache_misses: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub schema_version: u32,
    pub command: String,
    pub seed: u64,
    pub inputs: serde_json::Value,
    pub constants: serde_json::Value,
    pub verdicts: Vec<Verdict>,
    pub budgets: Budgets,
    pub provenance: Vec<Provenance>,
    pub table: TableSummary,
    pub timing: Timing,
}

impl BoundReport {
    pub fn failures(&self) -> Vec<&Verdict> {
        self.verdicts.iter().filter(|v| v.status == Status::Fail).collect()
    }

    pub fn flagged(&self) -> Vec<&Verdict> {
        self.verdicts.iter().filter(|v| v.status == Status::Flagged).collect()
    }

    /// 0 when every hard assertion passed (flags allowed), 1 on any violation.
    pub fn exit_code(&self) -> i32 {
        if self.failures().is_empty() {
            0
        } else {
            1
        }
    }

    /// The report with timing zeroed, for determinism comparisons.
    pub fn without_timing(&self) -> BoundReport {
        BoundReport {
            timing: Timing::default(),
            ..self.clone()
        }
    }
}

/// Fixed-column CSV table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Writes `<out>/<command>.json` and `<out>/<command>.csv`; returns the JSON path.
pub fn write_outputs(out: &Path, report: &BoundReport, table: &Table) -> Result<PathBuf> {
    fs::create_dir_all(out)?;
    table.write(&out.join(&report.table.file))?;
    let path = out.join(format!("{}.json", report.command));
    fs::write(&path, serde_json::to_string_pretty(report)?)?;
    Ok(path)
}
