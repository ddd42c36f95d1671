//! Fork-join kernels: quicksort and partitioned grouped aggregation.
//!
//! All parallelism in the crate lives here. Calls block until every task
//! they fork has joined. Work runs on a cached rayon pool per worker count;
//! when a pool cannot be created (for example on a platform without
//! threads) execution falls back to the sequential path, which produces
//! identical results.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::{ThreadPool, ThreadPoolBuilder};
use serde::{Deserialize, Serialize};

use crate::error::{CubeError, Result};

mod group;
mod sort;

pub use group::{merge_partials, parallel_group_aggregate, PartialAggregate};
pub use sort::{quicksort_par, quicksort_seq, sort_par_in_place, sort_seq_in_place};

pub const DEFAULT_SEQUENTIAL_CUTOFF: usize = 2_048;
pub const DEFAULT_CHUNK_SIZE: usize = 65_536;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParallelConfig {
    /// Threads available to a call. 1 forces the sequential path.
    pub worker_count: usize,
    /// Sub-problems at or below this many elements are sorted sequentially.
    pub sequential_cutoff: usize,
    /// Fact rows per aggregation partition.
    pub chunk_size: usize,
}

impl Default for ParallelConfig {
    fn default() -> Self {
        Self {
            worker_count: available_workers(),
            sequential_cutoff: DEFAULT_SEQUENTIAL_CUTOFF,
            chunk_size: DEFAULT_CHUNK_SIZE,
        }
    }
}

impl ParallelConfig {
    pub fn sequential() -> Self {
        Self {
            worker_count: 1,
            ..Self::default()
        }
    }

    pub fn with_workers(self, worker_count: usize) -> Self {
        Self {
            worker_count,
            ..self
        }
    }

    pub fn with_chunk_size(self, chunk_size: usize) -> Self {
        Self { chunk_size, ..self }
    }

    pub fn with_cutoff(self, sequential_cutoff: usize) -> Self {
        Self {
            sequential_cutoff,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("worker_count", self.worker_count),
            ("sequential_cutoff", self.sequential_cutoff),
            ("chunk_size", self.chunk_size),
        ] {
            if v == 0 {
                return Err(CubeError::Precondition(format!("{name} must be at least 1")));
            }
        }
        Ok(())
    }
}

/// Hardware parallelism, or 1 when it cannot be detected.
pub fn available_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Introspection counters attached to every kernel result.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecStats {
    /// Forked sub-tasks. Always 0 on the sequential path.
    pub tasks_spawned: u64,
    /// Aggregation partitions (0 for sorts).
    pub partitions: usize,
    /// Workers that were actually available to the call.
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Traced<T> {
    pub value: T,
    pub stats: ExecStats,
}

/// Shared pool for `workers` threads; `None` means run sequentially.
fn pool(workers: usize) -> Option<Arc<ThreadPool>> {
    if workers <= 1 {
        return None;
    }
    static POOLS: OnceLock<Mutex<HashMap<usize, Option<Arc<ThreadPool>>>>> = OnceLock::new();
    let mut pools = POOLS
        .get_or_init(Default::default)
        .lock()
        .unwrap_or_else(|e| e.into_inner());
    pools
        .entry(workers)
        .or_insert_with(|| {
            ThreadPoolBuilder::new()
                .num_threads(workers)
                .thread_name(|i| format!("cube-worker-{i}"))
                .build()
                .ok()
                .map(Arc::new)
        })
        .clone()
}
