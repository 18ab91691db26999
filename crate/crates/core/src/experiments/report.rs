use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    /// Empirical collision probability, or `sum_i v_i k_i` for search-time runs.
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signed_deviation: Option<f64>,
    /// Search time over distinct chain lengths.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ast_exact: Option<f64>,
    pub violation: bool,
}

impl TrialRecord {
    /// The quantity compared against the threshold.
    pub fn checked_value(&self) -> f64 {
        self.rel_error.unwrap_or(self.value)
    }
}

/// The closed-form statement an experiment measures coverage against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoreticalBound {
    /// Relative-error bound for collision runs, search-time bound for AST runs.
    pub threshold: f64,
    pub confidence: f64,
    pub tail: f64,
    pub vacuous: bool,
    pub underflow: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub trials: u64,
    pub m: u64,
    pub p_norm_sq: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_norm: Option<f64>,
    pub mean: f64,
    pub sample_std: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_rel_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_rel_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_ast_exact: Option<f64>,
    /// Trials where the distinct-chain search time equals the multiplicity bound.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ast_equal_trials: Option<u64>,
    /// Trials where the distinct-chain search time exceeded the multiplicity bound.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ast_order_violations: Option<u64>,
    pub violations: u64,
    pub violation_frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub bound: TheoreticalBound,
    pub aggregates: Aggregates,
    /// Every trial when `trials <= MAX_RECORDS`, otherwise a uniform reservoir sample.
    pub records: Vec<TrialRecord>,
    pub records_sampled: bool,
    pub wall_clock_seconds: f64,
}

impl ExperimentReport {
    pub fn aggregates_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.aggregates)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = create(path)?;
        serde_json::to_writer_pretty(&mut out, self)?;
        out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
        out.flush().map_err(|e| Error::io(path, e))
    }

    /// One row per retained trial: `trial,value,rel_error,violation`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_writer(create(path)?);
        w.write_record(["trial", "value", "rel_error", "violation"])?;
        for r in &self.records {
            w.write_record([
                r.trial.to_string(),
                r.value.to_string(),
                r.rel_error.map(|e| e.to_string()).unwrap_or_default(),
                r.violation.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}
