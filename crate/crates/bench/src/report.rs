use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};
use crate::stats::RunStats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

pub const CSV_HEADER: [&str; 11] = [
    "experiment",
    "mode",
    "iterations",
    "mean_ms",
    "median_ms",
    "min_ms",
    "max_ms",
    "std_dev_ms",
    "workers",
    "cores",
    "timestamp",
];

/// Serializes runs. JSON keeps everything, including every duration; CSV has
/// one summary row per run with times in milliseconds to three decimals.
pub fn emit_report(stats: &[RunStats], format: Format) -> Result<Vec<u8>> {
    if stats.is_empty() {
        return Err(BenchError::EmptyReport);
    }
    match format {
        Format::Json => Ok(serde_json::to_vec_pretty(stats).expect("stats serialize")),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| BenchError::Report(e.to_string());
            w.write_record(CSV_HEADER).map_err(io)?;
            for s in stats {
                let workers = s
                    .config
                    .pointer("/parallel/worker_count")
                    .map_or_else(String::new, |v| v.to_string());
                w.write_record([
                    s.experiment.clone(),
                    s.mode.clone(),
                    s.iterations().to_string(),
                    format!("{:.3}", s.mean_ms),
                    format!("{:.3}", s.median_ms),
                    format!("{:.3}", s.min_ms),
                    format!("{:.3}", s.max_ms),
                    format!("{:.3}", s.std_dev_ms),
                    workers,
                    s.environment.cores.to_string(),
                    s.environment.timestamp.to_string(),
                ])
                .map_err(io)?;
            }
            w.into_inner().map_err(|e| BenchError::Report(e.to_string()))
        }
    }
}

/// Reads a JSON report back.
pub fn parse_report(bytes: &[u8]) -> Result<Vec<RunStats>> {
    serde_json::from_slice(bytes).map_err(|e| BenchError::Report(e.to_string()))
}
