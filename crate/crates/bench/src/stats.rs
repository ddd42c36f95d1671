use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::PRNG_NAME;

/// Where a run happened. Timings mean little without it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub cores: usize,
    /// Seconds since the Unix epoch at the start of the run.
    pub timestamp: u64,
    pub os: String,
    pub arch: String,
    pub prng: String,
}

impl Environment {
    pub fn capture() -> Self {
        Self {
            cores: cube_core::parallel::available_workers(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
            os: std::env::consts::OS.to_owned(),
            arch: std::env::consts::ARCH.to_owned(),
            prng: PRNG_NAME.to_owned(),
        }
    }
}

/// Durations of one (experiment, mode) pair plus their summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub experiment: String,
    pub mode: String,
    /// Milliseconds, one entry per iteration.
    pub durations_ms: Vec<f64>,
    pub mean_ms: f64,
    pub median_ms: f64,
    pub min_ms: f64,
    pub max_ms: f64,
    /// Sample standard deviation (n - 1); zero for a single iteration.
    pub std_dev_ms: f64,
    /// The configuration that produced the run, echoed verbatim.
    pub config: serde_json::Value,
    pub environment: Environment,
}

impl RunStats {
    pub fn from_durations(
        experiment: &str,
        mode: &str,
        durations_ms: Vec<f64>,
        config: serde_json::Value,
        environment: Environment,
    ) -> Self {
        assert!(!durations_ms.is_empty(), "a run has at least one iteration");
        let n = durations_ms.len() as f64;
        let mean = durations_ms.iter().sum::<f64>() / n;
        let mut sorted = durations_ms.clone();
        sorted.sort_by(f64::total_cmp);
        let mid = sorted.len() / 2;
        let median = if sorted.len() % 2 == 1 {
            sorted[mid]
        } else {
            (sorted[mid - 1] + sorted[mid]) / 2.0
        };
        let std_dev = if durations_ms.len() > 1 {
            let ss: f64 = durations_ms.iter().map(|d| (d - mean).powi(2)).sum();
            (ss / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self {
            experiment: experiment.to_owned(),
            mode: mode.to_owned(),
            mean_ms: mean,
            median_ms: median,
            min_ms: sorted[0],
            max_ms: sorted[sorted.len() - 1],
            std_dev_ms: std_dev,
            durations_ms,
            config,
            environment,
        }
    }

    pub fn iterations(&self) -> usize {
        self.durations_ms.len()
    }
}
