use std::sync::atomic::{AtomicU64, Ordering};

use super::{pool, ExecStats, ParallelConfig, Traced};

const INSERTION_THRESHOLD: usize = 16;

/// Sorts a copy of `values`; the input is left untouched.
pub fn quicksort_seq<T: Ord + Copy>(values: &[T]) -> Vec<T> {
    let mut out = values.to_vec();
    sort_seq_in_place(&mut out);
    out
}

/// Parallel counterpart of [`quicksort_seq`]; the output is element-for-element
/// identical to it.
pub fn quicksort_par<T: Ord + Copy + Send>(values: &[T], cfg: &ParallelConfig) -> Traced<Vec<T>> {
    let mut out = values.to_vec();
    let stats = sort_par_in_place(&mut out, cfg);
    Traced { value: out, stats }
}

/// Median-of-three, three-way-partition quicksort. Recurses into the smaller
/// side and loops on the larger one, so stack depth stays logarithmic.
pub fn sort_seq_in_place<T: Ord + Copy>(mut v: &mut [T]) {
    loop {
        if v.len() <= INSERTION_THRESHOLD {
            insertion_sort(v);
            return;
        }
        let (lt, gt) = partition3(v);
        let (left, rest) = v.split_at_mut(lt);
        let right = &mut rest[gt - lt..];
        if left.len() < right.len() {
            sort_seq_in_place(left);
            v = right;
        } else {
            sort_seq_in_place(right);
            v = left;
        }
    }
}

/// Forks both sides of every partition larger than the sequential cutoff.
pub fn sort_par_in_place<T: Ord + Copy + Send>(v: &mut [T], cfg: &ParallelConfig) -> ExecStats {
    let workers = cfg.worker_count.max(1);
    let Some(pool) = pool(workers) else {
        sort_seq_in_place(v);
        return ExecStats {
            workers: 1,
            ..ExecStats::default()
        };
    };
    let spawned = AtomicU64::new(0);
    let cutoff = cfg.sequential_cutoff.max(1);
    pool.install(|| fork_sort(v, cutoff, &spawned));
    ExecStats {
        tasks_spawned: spawned.into_inner(),
        partitions: 0,
        workers,
    }
}

fn fork_sort<T: Ord + Copy + Send>(v: &mut [T], cutoff: usize, spawned: &AtomicU64) {
    if v.len() <= cutoff {
        sort_seq_in_place(v);
        return;
    }
    let (lt, gt) = partition3(v);
    let (left, rest) = v.split_at_mut(lt);
    let right = &mut rest[gt - lt..];
    spawned.fetch_add(1, Ordering::Relaxed);
    rayon::join(
        || fork_sort(left, cutoff, spawned),
        || fork_sort(right, cutoff, spawned),
    );
}

fn median_of_three<T: Ord + Copy>(v: &[T]) -> T {
    let (a, b, c) = (v[0], v[v.len() / 2], v[v.len() - 1]);
    if a < b {
        if b < c {
            b
        } else if a < c {
            c
        } else {
            a
        }
    } else if a < c {
        a
    } else if b < c {
        c
    } else {
        b
    }
}

/// Dijkstra partition around the median of three. Returns `(lt, gt)` with
/// `v[..lt] < p`, `v[lt..gt] == p`, `v[gt..] > p`.
fn partition3<T: Ord + Copy>(v: &mut [T]) -> (usize, usize) {
    let pivot = median_of_three(v);
    let (mut lt, mut i, mut gt) = (0, 0, v.len());
    while i < gt {
        if v[i] < pivot {
            v.swap(lt, i);
            lt += 1;
            i += 1;
        } else if v[i] > pivot {
            gt -= 1;
            v.swap(i, gt);
        } else {
            i += 1;
        }
    }
    (lt, gt)
}

fn insertion_sort<T: Ord + Copy>(v: &mut [T]) {
    for i in 1..v.len() {
        let x = v[i];
        let mut j = i;
        while j > 0 && v[j - 1] > x {
            v[j] = v[j - 1];
            j -= 1;
        }
        v[j] = x;
    }
}
