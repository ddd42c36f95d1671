use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use cube_bench::{
    emit_report, run_aggregate_experiment, run_sort_experiment, synthetic_dataset,
    AggregateConfig, BenchError, ExperimentConfig, Format, Mode, RunStats, SyntheticSpec,
};
use cube_core::{AggSpec, ParallelConfig};

/// Sequential vs. parallel benchmarks.
#[derive(Parser)]
#[command(name = "bench", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Time quicksort on seeded random integer arrays.
    Sort(SortArgs),
    /// Time cube construction on a seeded synthetic fact table.
    Agg(AggArgs),
}

#[derive(Args)]
struct Output {
    /// Report destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct SortArgs {
    /// Arrays to sort [default: 50, or 1000 with --full-scale].
    #[arg(long)]
    iterations: Option<usize>,
    /// Values per array [default: 100000, or 500000 with --full-scale].
    #[arg(long)]
    size: Option<usize>,
    /// Smallest generated value.
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    min: i64,
    /// One past the largest generated value.
    #[arg(long, default_value_t = 100_000, allow_negative_numbers = true)]
    max: i64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Mode::Both)]
    mode: Mode,
    /// Worker threads for the parallel sort [default: all hardware threads].
    #[arg(long)]
    workers: Option<usize>,
    /// Sub-arrays at or below this size are sorted sequentially.
    #[arg(long, default_value_t = cube_core::parallel::DEFAULT_SEQUENTIAL_CUTOFF)]
    cutoff: usize,
    /// Use the 1000 x 500000 profile.
    #[arg(long)]
    full_scale: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct AggArgs {
    #[arg(long, default_value_t = 1_000_000)]
    rows: usize,
    /// Dimension cardinalities, e.g. 100x10x4.
    #[arg(long, default_value = "100x10x4")]
    dims: String,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Worker threads for the parallel run [default: all hardware threads].
    #[arg(long)]
    workers: Option<usize>,
    /// Fact rows per aggregation partition.
    #[arg(long, default_value_t = cube_core::parallel::DEFAULT_CHUNK_SIZE)]
    chunk: usize,
    #[arg(long, default_value_t = 5)]
    iterations: usize,
    #[command(flatten)]
    output: Output,
}

fn sort(args: SortArgs) -> Result<(Vec<RunStats>, Output), BenchError> {
    let profile = if args.full_scale {
        ExperimentConfig::full_scale()
    } else {
        ExperimentConfig::desk_scale()
    };
    let mut parallel = ParallelConfig::default().with_cutoff(args.cutoff);
    if let Some(w) = args.workers {
        parallel = parallel.with_workers(w);
    }
    let cfg = ExperimentConfig {
        iterations: args.iterations.unwrap_or(profile.iterations),
        array_size: args.size.unwrap_or(profile.array_size),
        min: args.min,
        max: args.max,
        seed: args.seed,
        mode: args.mode,
        parallel,
    };
    Ok((run_sort_experiment(&cfg)?, args.output))
}

fn agg(args: AggArgs) -> Result<(Vec<RunStats>, Output), BenchError> {
    let spec = SyntheticSpec {
        rows: args.rows,
        cardinalities: SyntheticSpec::parse_dims(&args.dims)?,
        seed: args.seed,
        real_measure: false,
    };
    let (schema, facts) = synthetic_dataset(&spec)?;
    let mut parallel = ParallelConfig::default().with_chunk_size(args.chunk);
    if let Some(w) = args.workers {
        parallel = parallel.with_workers(w);
    }
    let cfg = AggregateConfig {
        iterations: args.iterations,
        parallel,
        dataset: serde_json::to_value(&spec).expect("spec serializes"),
    };
    let stats = run_aggregate_experiment(Arc::new(facts), &AggSpec::defaults(&schema), &cfg)?;
    Ok((stats, args.output))
}

fn summarize(stats: &[RunStats]) {
    for s in stats {
        eprintln!(
            "{} {}: mean {:.3} ms, median {:.3} ms over {} iterations",
            s.experiment,
            s.mode,
            s.mean_ms,
            s.median_ms,
            s.iterations()
        );
    }
    if let [seq, par] = stats {
        let cores = seq.environment.cores;
        let verdict = if cores < 4 {
            format!("ordering not assessed ({cores} hardware thread(s), need 4)")
        } else if par.mean_ms <= seq.mean_ms {
            "mean_par <= mean_seq".to_owned()
        } else {
            "mean_par > mean_seq".to_owned()
        };
        eprintln!("{verdict}");
    }
}

fn main() -> ExitCode {
    let result = match Cli::parse().command {
        Command::Sort(a) => sort(a),
        Command::Agg(a) => agg(a),
    };
    let (stats, output) = match result {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    summarize(&stats);
    let bytes = match emit_report(&stats, output.format) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    let written = match &output.out {
        Some(path) => std::fs::write(path, &bytes),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(&bytes)
        }
    };
    if let Err(e) = written {
        eprintln!("error: cannot write report: {e}");
        return ExitCode::FAILURE;
    }
    ExitCode::SUCCESS
}
