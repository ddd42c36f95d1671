use std::collections::btree_map::Entry;
use std::collections::HashMap;
use std::ops::Range;

use rayon::prelude::*;

use super::{pool, ExecStats, ParallelConfig, Traced};
use crate::aggregate::{AggFn, AggState};
use crate::cube::{check_ranges, AggSpec, CellMap, Coord, Filters};
use crate::error::{CubeError, Result};
use crate::facts::{FactTable, MeasureColumn};

/// Cells aggregated from one contiguous run of fact rows.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialAggregate {
    pub partition: usize,
    pub cells: HashMap<Coord, Vec<AggState>>,
}

struct Plan<'a> {
    /// (base member column, ancestor table at the target level) per retained dimension.
    keys: Vec<(&'a [u32], &'a [u32])>,
    /// (base member column, admitted base members) per filtered dimension.
    filters: Vec<(&'a [u32], Vec<bool>)>,
    measures: Vec<(&'a MeasureColumn, AggFn)>,
}

impl Plan<'_> {
    fn aggregate(&self, partition: usize, rows: Range<usize>) -> PartialAggregate {
        let mut cells: HashMap<Coord, Vec<AggState>> = HashMap::new();
        let mut key: Coord = Vec::with_capacity(self.keys.len());
        'rows: for row in rows {
            for (column, admitted) in &self.filters {
                if !admitted[column[row] as usize] {
                    continue 'rows;
                }
            }
            key.clear();
            key.extend(self.keys.iter().map(|(column, up)| up[column[row] as usize]));
            if let Some(states) = cells.get_mut(key.as_slice()) {
                for (state, (column, _)) in states.iter_mut().zip(&self.measures) {
                    match column {
                        MeasureColumn::Integer(v) => state.push_int(v[row]),
                        MeasureColumn::Real(v) => state.push_real(v[row]),
                    }
                }
            } else {
                let states = self
                    .measures
                    .iter()
                    .map(|(column, func)| match column {
                        MeasureColumn::Integer(v) => AggState::from_int(*func, v[row]),
                        MeasureColumn::Real(v) => AggState::from_real(*func, v[row]),
                    })
                    .collect();
                cells.insert(key.clone(), states);
            }
        }
        PartialAggregate { partition, cells }
    }
}

/// Groups validated facts by the given level assignment.
///
/// Rows are cut into `ceil(rows / chunk_size)` contiguous partitions that are
/// aggregated independently and merged in ascending partition order. The
/// partition boundaries depend only on the row count and `chunk_size`, so the
/// result, real-valued sums included, is bit-identical for any worker count.
pub fn parallel_group_aggregate(
    facts: &FactTable,
    levels: &[Option<usize>],
    filters: &Filters,
    agg: &AggSpec,
    cfg: &ParallelConfig,
) -> Result<Traced<CellMap>> {
    let schema = facts.schema();
    let resolved = facts.resolved().ok_or_else(|| {
        CubeError::Precondition("facts must pass validation before aggregation".into())
    })?;
    if levels.len() != schema.dimensions().len() {
        return Err(CubeError::Precondition(format!(
            "level assignment names {} dimensions, schema has {}",
            levels.len(),
            schema.dimensions().len()
        )));
    }
    if agg.funcs().len() != schema.measures().len() {
        return Err(CubeError::Precondition(
            "aggregation spec does not match the schema".into(),
        ));
    }

    let keys = levels
        .iter()
        .enumerate()
        .filter_map(|(d, level)| {
            level.map(|l| (resolved[d].as_slice(), schema.dimension(d).ancestor_table(l)))
        })
        .collect();
    let filters = (0..levels.len())
        .filter_map(|d| filters.admitted_base(schema, d).map(|a| (resolved[d].as_slice(), a)))
        .collect();
    let measures = agg
        .funcs()
        .iter()
        .enumerate()
        .map(|(m, &f)| (facts.measure(m), f))
        .collect();
    let plan = Plan {
        keys,
        filters,
        measures,
    };

    let rows = facts.rows();
    let chunk = cfg.chunk_size.max(1);
    let ranges: Vec<Range<usize>> = (0..rows.div_ceil(chunk))
        .map(|p| p * chunk..((p + 1) * chunk).min(rows))
        .collect();

    let workers = cfg.worker_count.max(1);
    let (partials, stats) = match pool(workers).filter(|_| ranges.len() > 1) {
        Some(pool) => {
            let partials: Vec<PartialAggregate> = pool.install(|| {
                ranges
                    .par_iter()
                    .enumerate()
                    .map(|(p, r)| plan.aggregate(p, r.clone()))
                    .collect()
            });
            let stats = ExecStats {
                tasks_spawned: ranges.len() as u64,
                partitions: ranges.len(),
                workers,
            };
            (partials, stats)
        }
        None => {
            let partials = ranges
                .iter()
                .enumerate()
                .map(|(p, r)| plan.aggregate(p, r.clone()))
                .collect();
            let stats = ExecStats {
                tasks_spawned: 0,
                partitions: ranges.len(),
                workers: 1,
            };
            (partials, stats)
        }
    };

    let cells = merge_partials(partials)?;
    check_ranges(schema, levels, &cells)?;
    Ok(Traced {
        value: cells,
        stats,
    })
}

/// Merges partials per coordinate, in the order given.
///
/// Partition indices must be exactly `0..partials.len()` in ascending order.
pub fn merge_partials(partials: Vec<PartialAggregate>) -> Result<CellMap> {
    for (expected, p) in partials.iter().enumerate() {
        if p.partition != expected {
            return Err(CubeError::Contract(format!(
                "partition index {} at position {expected}; indices must be dense and ascending",
                p.partition
            )));
        }
    }
    let mut merged = CellMap::new();
    for partial in partials {
        for (coord, states) in partial.cells {
            match merged.entry(coord) {
                Entry::Vacant(slot) => {
                    slot.insert(states);
                }
                Entry::Occupied(mut slot) => {
                    let target = slot.get_mut();
                    if target.len() != states.len()
                        || !target.iter_mut().zip(&states).all(|(a, b)| a.merge(b))
                    {
                        return Err(CubeError::Contract(format!(
                            "partition {} holds incompatible states for coordinate {:?}",
                            partial.partition,
                            slot.key()
                        )));
                    }
                }
            }
        }
    }
    Ok(merged)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregate::Value;
    use crate::fixtures::f6_facts;

    fn partial(partition: usize, cells: &[(&[u32], i64)]) -> PartialAggregate {
        PartialAggregate {
            partition,
            cells: cells
                .iter()
                .map(|(c, v)| (c.to_vec(), vec![AggState::from_int(AggFn::Sum, *v)]))
                .collect(),
        }
    }

    #[test]
    fn merge_of_one_partial_is_identity() {
        let p = partial(0, &[(&[0, 0, 0], 10), (&[1, 1, 1], 60)]);
        let merged = merge_partials(vec![p.clone()]).unwrap();
        assert_eq!(merged.len(), 2);
        for (k, v) in &p.cells {
            assert_eq!(&merged[k], v);
        }
    }

    #[test]
    fn disjoint_partials_union() {
        let merged = merge_partials(vec![
            partial(0, &[(&[0, 0, 0], 10)]),
            partial(1, &[(&[2, 1, 1], 50)]),
        ])
        .unwrap();
        assert_eq!(merged.len(), 2);
    }

    #[test]
    fn shared_coordinate_states_merge() {
        let merged = merge_partials(vec![
            partial(0, &[(&[0, 0, 0], 10)]),
            partial(1, &[(&[0, 0, 0], 5)]),
        ])
        .unwrap();
        assert_eq!(merged[&vec![0, 0, 0]][0].finalize(), Value::Int(15));
    }

    #[test]
    fn duplicate_partition_index_is_a_contract_error() {
        let err = merge_partials(vec![partial(0, &[]), partial(0, &[])]).unwrap_err();
        assert_eq!(err.code(), "contract");
        let err = merge_partials(vec![partial(1, &[]), partial(0, &[])]).unwrap_err();
        assert_eq!(err.code(), "contract");
    }

    #[test]
    fn chunking_does_not_change_f6() {
        let facts = f6_facts();
        let agg = AggSpec::defaults(facts.schema());
        let levels = [Some(0), Some(0), Some(0)];
        let run = |chunk, workers| {
            let cfg = ParallelConfig::default().with_chunk_size(chunk).with_workers(workers);
            parallel_group_aggregate(&facts, &levels, &Filters::default(), &agg, &cfg).unwrap()
        };
        let three = run(2, 4);
        let one = run(6, 1);
        assert_eq!(three.stats.partitions, 3);
        assert_eq!(one.stats.partitions, 1);
        assert_eq!(one.stats.tasks_spawned, 0);
        assert_eq!(three.value, one.value);
        assert_eq!(three.value.len(), 6);
    }
}
