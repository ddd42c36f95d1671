//! Sparse cubes built from validated fact tables.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::aggregate::{AggFn, AggState, Value};
use crate::error::{CubeError, Result};
use crate::facts::FactTable;
use crate::parallel::{parallel_group_aggregate, ExecStats, ParallelConfig};
use crate::schema::CubeSchema;

/// Member indices, one per retained dimension, in schema dimension order.
pub type Coord = Vec<u32>;

/// Coordinate -> one aggregate state per measure. Absent keys are empty cells.
pub type CellMap = BTreeMap<Coord, Vec<AggState>>;

/// One aggregation function per schema measure, in schema order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AggSpec {
    funcs: Vec<AggFn>,
}

impl AggSpec {
    /// Each measure's declared default.
    pub fn defaults(schema: &CubeSchema) -> Self {
        Self {
            funcs: schema.measures().iter().map(|m| m.default_agg).collect(),
        }
    }

    /// Applies `overrides` on top of the schema defaults.
    pub fn from_map<'a, I>(schema: &CubeSchema, overrides: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, AggFn)>,
    {
        let mut spec = Self::defaults(schema);
        for (name, func) in overrides {
            let m = schema
                .measure_index(name)
                .ok_or_else(|| CubeError::Schema(format!("unknown measure '{name}'")))?;
            spec.funcs[m] = func;
        }
        Ok(spec)
    }

    pub fn funcs(&self) -> &[AggFn] {
        &self.funcs
    }
}

/// Member restrictions recorded by slice and dice, keyed by
/// `(dimension, level)`. Sets at the same key intersect; a set admitting every
/// member of its level is dropped, so equal restrictions compare equal.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Filters {
    predicates: BTreeMap<(usize, usize), BTreeSet<u32>>,
}

impl Filters {
    pub fn is_empty(&self) -> bool {
        self.predicates.is_empty()
    }

    pub fn predicates(&self) -> impl Iterator<Item = (usize, usize, &BTreeSet<u32>)> {
        self.predicates.iter().map(|(&(d, l), s)| (d, l, s))
    }

    pub(crate) fn restrict(
        &mut self,
        schema: &CubeSchema,
        dim: usize,
        level: usize,
        members: BTreeSet<u32>,
    ) {
        let set = match self.predicates.remove(&(dim, level)) {
            Some(existing) => existing.intersection(&members).copied().collect(),
            None => members,
        };
        if set.len() < schema.dimension(dim).level(level).cardinality() {
            self.predicates.insert((dim, level), set);
        }
    }

    /// Admission mask over base members of `dim`, or `None` if unrestricted.
    pub(crate) fn admitted_base(&self, schema: &CubeSchema, dim: usize) -> Option<Vec<bool>> {
        let spec = schema.dimension(dim);
        let mut mask: Option<Vec<bool>> = None;
        for (&(_, level), set) in self.predicates.range((dim, 0)..(dim + 1, 0)) {
            let up = spec.ancestor_table(level);
            let mask = mask.get_or_insert_with(|| vec![true; up.len()]);
            for (base, ok) in mask.iter_mut().enumerate() {
                *ok &= set.contains(&up[base]);
            }
        }
        mask
    }
}

/// Rejects integer sums that left the 64-bit range.
pub(crate) fn check_ranges(
    schema: &CubeSchema,
    levels: &[Option<usize>],
    cells: &CellMap,
) -> Result<()> {
    for (coord, states) in cells {
        if let Some(m) = states.iter().position(|s| !s.in_range()) {
            return Err(CubeError::Overflow {
                measure: schema.measures()[m].name.clone(),
                coordinate: coordinate_names(schema, levels, coord),
            });
        }
    }
    Ok(())
}

pub(crate) fn coordinate_names(
    schema: &CubeSchema,
    levels: &[Option<usize>],
    coord: &[u32],
) -> Vec<String> {
    levels
        .iter()
        .enumerate()
        .filter_map(|(d, l)| l.map(|l| (d, l)))
        .zip(coord)
        .map(|((d, l), &m)| schema.dimension(d).level(l).members()[m as usize].clone())
        .collect()
}

/// An immutable cube: a sparse cell map plus the level assignment, filters
/// and aggregation that produced it. Cubes keep a handle to their base facts
/// so drill-down can re-aggregate at finer levels.
#[derive(Debug, Clone)]
pub struct Cube {
    pub(crate) schema: Arc<CubeSchema>,
    pub(crate) facts: Option<Arc<FactTable>>,
    /// Current level per dimension; `None` once rolled up to ALL or sliced away.
    pub(crate) levels: Vec<Option<usize>>,
    pub(crate) filters: Filters,
    pub(crate) agg: AggSpec,
    pub(crate) config: ParallelConfig,
    pub(crate) cells: CellMap,
    pub(crate) stats: ExecStats,
}

/// Builds the base-granularity cube with the default parallel configuration.
pub fn build_cube(facts: Arc<FactTable>, agg: &AggSpec) -> Result<Cube> {
    build_cube_with(facts, agg, ParallelConfig::default())
}

pub fn build_cube_with(facts: Arc<FactTable>, agg: &AggSpec, config: ParallelConfig) -> Result<Cube> {
    config.validate()?;
    if !facts.is_validated() {
        return Err(CubeError::Precondition(
            "facts must pass validation before a cube can be built".into(),
        ));
    }
    let schema = facts.schema().clone();
    if agg.funcs().len() != schema.measures().len() {
        return Err(CubeError::Schema(
            "aggregation spec was built for a different schema".into(),
        ));
    }
    let levels = vec![Some(0); schema.dimensions().len()];
    let filters = Filters::default();
    let traced = parallel_group_aggregate(&facts, &levels, &filters, agg, &config)?;
    Ok(Cube {
        schema,
        facts: Some(facts),
        levels,
        filters,
        agg: agg.clone(),
        config,
        cells: traced.value,
        stats: traced.stats,
    })
}

impl Cube {
    pub fn schema(&self) -> &Arc<CubeSchema> {
        &self.schema
    }

    pub fn facts(&self) -> Option<&Arc<FactTable>> {
        self.facts.as_ref()
    }

    pub fn levels(&self) -> &[Option<usize>] {
        &self.levels
    }

    pub fn filters(&self) -> &Filters {
        &self.filters
    }

    pub fn agg(&self) -> &AggSpec {
        &self.agg
    }

    pub fn config(&self) -> &ParallelConfig {
        &self.config
    }

    pub fn cells(&self) -> &CellMap {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Counters from the aggregation that produced this cube.
    pub fn exec_stats(&self) -> ExecStats {
        self.stats
    }

    /// Dimensions that still contribute a coordinate component, in order.
    pub fn active_dimensions(&self) -> Vec<usize> {
        self.levels
            .iter()
            .enumerate()
            .filter_map(|(d, l)| l.map(|_| d))
            .collect()
    }

    /// Position of `dim` within coordinates, if it is retained.
    pub fn coordinate_position(&self, dim: usize) -> Option<usize> {
        self.levels[dim]?;
        Some(self.levels[..dim].iter().filter(|l| l.is_some()).count())
    }

    /// Same cube without the base-facts handle; drill-down is then unavailable.
    pub fn without_facts(&self) -> Cube {
        Cube {
            facts: None,
            ..self.clone()
        }
    }

    pub fn with_config(&self, config: ParallelConfig) -> Cube {
        Cube {
            config,
            ..self.clone()
        }
    }

    pub fn member_names(&self, coord: &[u32]) -> Vec<String> {
        coordinate_names(&self.schema, &self.levels, coord)
    }

    /// Resolves member names to a coordinate at the cube's current levels.
    pub fn coordinate(&self, members: &[&str]) -> Result<Coord> {
        let active = self.active_dimensions();
        if members.len() != active.len() {
            return Err(CubeError::Coordinate(format!(
                "expected {} members, got {}",
                active.len(),
                members.len()
            )));
        }
        active
            .iter()
            .zip(members)
            .map(|(&d, name)| {
                let dim = self.schema.dimension(d);
                let level = dim.level(self.levels[d].expect("active"));
                level.member_index(name).ok_or_else(|| {
                    CubeError::Coordinate(format!(
                        "'{name}' is not a '{}' member of dimension '{}'",
                        level.name(),
                        dim.name()
                    ))
                })
            })
            .collect()
    }

    /// Finalized measure values at `members`, or `None` for an empty cell.
    pub fn cell(&self, members: &[&str]) -> Result<Option<Vec<Value>>> {
        let coord = self.coordinate(members)?;
        Ok(self.cells.get(&coord).map(|s| finalize(s)))
    }

    /// Sum of a measure's finalized values over all cells.
    pub fn total(&self, measure: usize) -> f64 {
        self.cells.values().map(|s| s[measure].finalize().as_f64()).sum()
    }

    /// Exact total of an integer sum or count measure, merged from states.
    pub fn exact_total(&self, measure: usize) -> Option<i128> {
        let mut total = 0i128;
        for states in self.cells.values() {
            let s = &states[measure];
            total += match s.func() {
                AggFn::Count => s.count()? as i128,
                AggFn::Sum => s.int_sum()?,
                _ => return None,
            };
        }
        Some(total)
    }
}

pub(crate) fn finalize(states: &[AggState]) -> Vec<Value> {
    states.iter().map(AggState::finalize).collect()
}

/// Content equality: levels, filters, aggregation and cells (bitwise). The
/// facts handle and parallel configuration are not compared.
impl PartialEq for Cube {
    fn eq(&self, other: &Self) -> bool {
        self.levels == other.levels
            && self.filters == other.filters
            && self.agg == other.agg
            && self.cells == other.cells
    }
}
