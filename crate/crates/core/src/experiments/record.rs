//! Run summaries and the result manifest.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::eigensolve::Interval;
use crate::error::Result;

/// Environment variable naming the default output root.
pub const OUTPUT_ROOT_VAR: &str = "ANDERSON_OUTPUT_ROOT";

/// Output root from [`OUTPUT_ROOT_VAR`], or `runs` in the working directory.
pub fn default_output_root() -> PathBuf {
    std::env::var_os(OUTPUT_ROOT_VAR).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("runs"))
}

/// Scalar outcome of one statistic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatisticSummary {
    pub statistic: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<Interval>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sup_distance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violation_fraction: Option<f64>,
    /// Statistic-specific extras.
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub details: serde_json::Value,
}

impl StatisticSummary {
    pub fn new(statistic: &str, n: usize) -> Self {
        StatisticSummary {
            statistic: statistic.to_string(),
            window: None,
            scale: None,
            n,
            sup_distance: None,
            p_value: None,
            violation_fraction: None,
            details: serde_json::Value::Null,
        }
    }
}

/// Manifest of a completed run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub name: String,
    pub config_digest: String,
    pub version: String,
    pub output_dir: PathBuf,
    pub summaries: Vec<StatisticSummary>,
    /// Files written, relative to `output_dir`.
    pub files: Vec<String>,
    pub wall_clock_seconds: f64,
}

impl ResultRecord {
    pub fn summary(&self, statistic: &str) -> Option<&StatisticSummary> {
        self.summaries.iter().find(|s| s.statistic == statistic)
    }
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    Ok(())
}
