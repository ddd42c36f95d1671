use std::hint::black_box;
use std::sync::Arc;
use std::time::Instant;

use clap::ValueEnum;
use cube_core::{build_cube_with, quicksort_par, quicksort_seq, AggSpec, FactTable, ParallelConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{BenchError, Result};
use crate::stats::{Environment, RunStats};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Seq,
    Par,
    Both,
}

impl Mode {
    fn runs_seq(self) -> bool {
        matches!(self, Mode::Seq | Mode::Both)
    }

    fn runs_par(self) -> bool {
        matches!(self, Mode::Par | Mode::Both)
    }
}

/// A sort experiment: `iterations` fresh arrays of `array_size` integers
/// drawn uniformly from `min..max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub iterations: usize,
    pub array_size: usize,
    /// Inclusive lower bound of generated values.
    pub min: i64,
    /// Exclusive upper bound of generated values.
    pub max: i64,
    pub seed: u64,
    pub mode: Mode,
    pub parallel: ParallelConfig,
}

impl ExperimentConfig {
    /// 50 arrays of 100,000 values in `0..100000`.
    pub fn desk_scale() -> Self {
        Self {
            iterations: 50,
            array_size: 100_000,
            min: 0,
            max: 100_000,
            seed: 42,
            mode: Mode::Both,
            parallel: ParallelConfig::default(),
        }
    }

    /// 1,000 arrays of 500,000 values in `0..100000`.
    pub fn full_scale() -> Self {
        Self {
            iterations: 1_000,
            array_size: 500_000,
            ..Self::desk_scale()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(BenchError::Config("iterations must be at least 1".into()));
        }
        if self.array_size == 0 {
            return Err(BenchError::Config("array size must be at least 1".into()));
        }
        if self.min >= self.max {
            return Err(BenchError::Config(format!(
                "value range {}..{} is empty",
                self.min, self.max
            )));
        }
        self.parallel.validate()?;
        Ok(())
    }
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// FNV-1a over the values' little-endian bytes.
fn checksum(values: &[i64]) -> u64 {
    values
        .iter()
        .flat_map(|v| v.to_le_bytes())
        .fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// The arrays a sort experiment sorts, in order. Identical configurations
/// yield identical sequences.
pub fn sort_inputs(cfg: &ExperimentConfig) -> impl Iterator<Item = Vec<i64>> + '_ {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..cfg.iterations).map(move |_| {
        (0..cfg.array_size)
            .map(|_| rng.gen_range(cfg.min..cfg.max))
            .collect()
    })
}

/// Times the sort kernels. Returns one [`RunStats`] per mode that ran.
///
/// Only the sort call is timed; array generation and copying happen
/// before the clock starts. In `both` mode the two kernels receive
/// bitwise-identical copies and must produce the same output.
pub fn run_sort_experiment(cfg: &ExperimentConfig) -> Result<Vec<RunStats>> {
    cfg.validate()?;
    let environment = Environment::capture();
    let mut seq_ms = Vec::with_capacity(cfg.iterations);
    let mut par_ms = Vec::with_capacity(cfg.iterations);

    for (iteration, input) in sort_inputs(cfg).enumerate() {
        let mut seq_out = None;
        if cfg.mode.runs_seq() {
            let copy = input.clone();
            let start = Instant::now();
            let sorted = quicksort_seq(black_box(&copy));
            seq_ms.push(elapsed_ms(start));
            seq_out = Some(black_box(sorted));
        }
        if cfg.mode.runs_par() {
            let copy = input.clone();
            if checksum(&copy) != checksum(&input) {
                return Err(BenchError::DeterminismViolation(format!(
                    "iteration {iteration}: parallel input differs from the generated array"
                )));
            }
            let start = Instant::now();
            let sorted = quicksort_par(black_box(&copy), &cfg.parallel).value;
            par_ms.push(elapsed_ms(start));
            if let Some(seq) = &seq_out {
                if *seq != sorted {
                    return Err(BenchError::DeterminismViolation(format!(
                        "iteration {iteration}: sequential and parallel sorts disagree"
                    )));
                }
            }
            black_box(sorted);
        }
    }

    let echo = serde_json::to_value(cfg).expect("config serializes");
    let mut out = Vec::new();
    if cfg.mode.runs_seq() {
        out.push(RunStats::from_durations("sort", "seq", seq_ms, echo.clone(), environment.clone()));
    }
    if cfg.mode.runs_par() {
        out.push(RunStats::from_durations("sort", "par", par_ms, echo, environment));
    }
    Ok(out)
}

/// An aggregation experiment over an already-loaded fact table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateConfig {
    pub iterations: usize,
    /// Configuration of the parallel run. The sequential run uses the same
    /// chunk size with a single worker.
    pub parallel: ParallelConfig,
    /// Free-form description of the input, echoed in the report.
    pub dataset: serde_json::Value,
}

/// Times cube construction sequentially and in parallel.
///
/// Every iteration compares the two cubes; any difference aborts the run
/// with [`BenchError::DeterminismViolation`] rather than producing a report.
pub fn run_aggregate_experiment(
    facts: Arc<FactTable>,
    agg: &AggSpec,
    cfg: &AggregateConfig,
) -> Result<Vec<RunStats>> {
    if cfg.iterations == 0 {
        return Err(BenchError::Config("iterations must be at least 1".into()));
    }
    cfg.parallel.validate()?;
    let environment = Environment::capture();
    let sequential = ParallelConfig {
        worker_count: 1,
        ..cfg.parallel
    };
    let mut seq_ms = Vec::with_capacity(cfg.iterations);
    let mut par_ms = Vec::with_capacity(cfg.iterations);
    for iteration in 0..cfg.iterations {
        let start = Instant::now();
        let seq = build_cube_with(facts.clone(), agg, sequential)?;
        seq_ms.push(elapsed_ms(start));

        let start = Instant::now();
        let par = build_cube_with(facts.clone(), agg, cfg.parallel)?;
        par_ms.push(elapsed_ms(start));

        if seq != par {
            return Err(BenchError::DeterminismViolation(format!(
                "iteration {iteration}: {} sequential cells vs {} parallel cells differ",
                seq.len(),
                par.len()
            )));
        }
    }
    let echo = json!({
        "iterations": cfg.iterations,
        "parallel": cfg.parallel,
        "rows": facts.rows(),
        "dataset": cfg.dataset,
    });
    Ok(vec![
        RunStats::from_durations("aggregate", "seq", seq_ms, echo.clone(), environment.clone()),
        RunStats::from_durations("aggregate", "par", par_ms, echo, environment),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_single_element_run() {
        let cfg = ExperimentConfig {
            iterations: 1,
            array_size: 1,
            mode: Mode::Seq,
            ..ExperimentConfig::desk_scale()
        };
        let stats = run_sort_experiment(&cfg).unwrap();
        assert_eq!(stats.len(), 1);
        assert_eq!(stats[0].durations_ms.len(), 1);
        assert!(stats[0].durations_ms[0] >= 0.0);
        assert_eq!(stats[0].mean_ms, stats[0].durations_ms[0]);
    }

    #[test]
    fn config_errors() {
        let base = ExperimentConfig::desk_scale();
        for bad in [
            ExperimentConfig { iterations: 0, ..base.clone() },
            ExperimentConfig { array_size: 0, ..base.clone() },
            ExperimentConfig { min: 5, max: 5, ..base.clone() },
        ] {
            assert!(matches!(run_sort_experiment(&bad), Err(BenchError::Config(_))));
        }
    }

    #[test]
    fn checksum_sees_order() {
        assert_ne!(checksum(&[1, 2]), checksum(&[2, 1]));
    }
}
