//! Timing harness for the sequential and parallel kernels.
//!
//! Sort experiments time `quicksort_seq` against `quicksort_par` on
//! identical pseudorandom arrays; aggregation experiments time cube
//! construction under a single worker and under the configured pool,
//! checking that both produce the same cells. Reports are JSON (lossless)
//! or CSV (one summary row per experiment and mode).

pub mod error;
pub mod experiment;
pub mod report;
pub mod stats;
pub mod synth;

pub use error::{BenchError, Result};
pub use experiment::{
    run_aggregate_experiment, run_sort_experiment, sort_inputs, AggregateConfig, ExperimentConfig, Mode,
};
pub use report::{emit_report, parse_report, Format};
pub use stats::{Environment, RunStats};
pub use synth::{synthetic_dataset, SyntheticSpec};

/// PRNG used for every generated input. Fixed so that seeds stay meaningful
/// across releases.
pub const PRNG_NAME: &str = "ChaCha8 (rand_chacha 0.3, seed_from_u64)";
