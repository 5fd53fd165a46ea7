//! Per-trial rows, per-`n` aggregates, CSV and JSON output.

use std::path::{Path, PathBuf};

use localtest_core::Algo;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::HarnessError;

/// One tester run. Field order is the CSV column order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub algo: Algo,
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub trial: usize,
    pub verdict: VerdictLabel,
    pub distinct_queries: usize,
    pub raw_queries: u64,
    pub runtime_ms: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictLabel {
    Accept,
    Reject,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub algo: Algo,
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub epsilon: f64,
    pub trials: usize,
    pub rejected: usize,
    pub rejection_rate: f64,
    pub mean_queries: f64,
    pub theoretical_bound: f64,
    /// Mean queries over the previous `n`'s (scaling runs only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub growth_ratio: Option<f64>,
}

impl Aggregate {
    pub fn from_rows(rows: &[TrialRow], algo: Algo, n: usize, d: usize, k: usize, epsilon: f64) -> Self {
        let trials = rows.len();
        let rejected = rows.iter().filter(|r| r.verdict == VerdictLabel::Reject).count();
        let per = |x: f64| if trials == 0 { 0.0 } else { x / trials as f64 };
        Aggregate {
            algo,
            n,
            d,
            k,
            epsilon,
            trials,
            rejected,
            rejection_rate: per(rejected as f64),
            mean_queries: per(rows.iter().map(|r| r.distinct_queries as f64).sum()),
            theoretical_bound: localtest_core::testers::theoretical_bound(algo, n, d, k, epsilon),
            growth_ratio: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: ExperimentConfig,
    pub rows: Vec<TrialRow>,
    pub aggregates: Vec<Aggregate>,
}

#[derive(Serialize)]
struct Summary<'a> {
    config: &'a ExperimentConfig,
    aggregates: &'a [Aggregate],
}

impl Report {
    pub fn to_csv(&self) -> Result<String, HarnessError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        if self.rows.is_empty() {
            w.write_record([
                "algo",
                "n",
                "d",
                "k",
                "epsilon",
                "seed",
                "trial",
                "verdict",
                "distinct_queries",
                "raw_queries",
                "runtime_ms",
            ])
            .map_err(|e| HarnessError::Io(e.to_string()))?;
        }
        for r in &self.rows {
            w.serialize(r).map_err(|e| HarnessError::Io(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| HarnessError::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| HarnessError::Io(e.to_string()))
    }

    /// Config echo plus aggregates.
    pub fn summary_json(&self) -> Result<String, HarnessError> {
        serde_json::to_string_pretty(&Summary { config: &self.config, aggregates: &self.aggregates })
            .map_err(|e| HarnessError::Io(e.to_string()))
    }

    /// Write `<path>` (CSV) and the summary next to it with a `.json` extension.
    pub fn write(&self, csv_path: &Path) -> Result<PathBuf, HarnessError> {
        let io = |e: std::io::Error| HarnessError::Io(format!("{}: {e}", csv_path.display()));
        if let Some(dir) = csv_path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(io)?;
        }
        std::fs::write(csv_path, self.to_csv()?).map_err(io)?;
        let json_path = csv_path.with_extension("json");
        std::fs::write(&json_path, self.summary_json()?).map_err(io)?;
        Ok(json_path)
    }
}
