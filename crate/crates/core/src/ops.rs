//! Roll-up, drill-down, slice and dice. Each returns a new cube and leaves
//! its input untouched.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::cube::{check_ranges, CellMap, Cube};
use crate::error::{CubeError, Result};
use crate::parallel::parallel_group_aggregate;

/// Where a roll-up goes: a named coarser level, or ALL (dimension removed).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RollTarget {
    Level(String),
    All,
}

impl From<&str> for RollTarget {
    fn from(s: &str) -> Self {
        if s == "ALL" {
            RollTarget::All
        } else {
            RollTarget::Level(s.to_owned())
        }
    }
}

impl fmt::Display for RollTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RollTarget::Level(l) => f.write_str(l),
            RollTarget::All => f.write_str("ALL"),
        }
    }
}

fn level_name(cube: &Cube, dim: usize) -> String {
    match cube.levels[dim] {
        Some(l) => cube.schema.dimension(dim).level(l).name().to_owned(),
        None => "ALL".to_owned(),
    }
}

fn require_level(cube: &Cube, dim: usize, name: &str) -> Result<usize> {
    let spec = cube.schema.dimension(dim);
    spec.level_index(name).ok_or_else(|| {
        CubeError::Schema(format!(
            "dimension '{}' has no level '{name}'",
            spec.name()
        ))
    })
}

/// Re-aggregates to a strictly coarser level of `dimension`, or removes it.
///
/// New cells merge the aggregate states of the old cells that map onto them,
/// visiting old cells in coordinate order.
pub fn roll_up(cube: &Cube, dimension: &str, target: impl Into<RollTarget>) -> Result<Cube> {
    let target = target.into();
    let d = cube.schema.require_dimension(dimension)?;
    let new_level = match &target {
        RollTarget::All => None,
        RollTarget::Level(name) => Some(require_level(cube, d, name)?),
    };
    let coarser = match (cube.levels[d], new_level) {
        (None, _) => false,
        (Some(_), None) => true,
        (Some(cur), Some(new)) => new > cur,
    };
    if !coarser {
        return Err(CubeError::LevelOrder(format!(
            "'{target}' is not coarser than '{}' on dimension '{dimension}'",
            level_name(cube, d)
        )));
    }

    let cur = cube.levels[d].expect("checked above");
    let pos = cube.coordinate_position(d).expect("active");
    let spec = cube.schema.dimension(d);
    let mut cells = CellMap::new();
    for (coord, states) in &cube.cells {
        let mut key = coord.clone();
        match new_level {
            Some(l) => key[pos] = spec.lift(cur, l, coord[pos]),
            None => {
                key.remove(pos);
            }
        }
        match cells.entry(key) {
            Entry::Vacant(slot) => {
                slot.insert(states.clone());
            }
            Entry::Occupied(mut slot) => {
                for (a, b) in slot.get_mut().iter_mut().zip(states) {
                    if !a.merge(b) {
                        return Err(CubeError::Contract("cells hold incompatible states".into()));
                    }
                }
            }
        }
    }

    let mut levels = cube.levels.clone();
    levels[d] = new_level;
    check_ranges(&cube.schema, &levels, &cells)?;
    Ok(Cube {
        levels,
        cells,
        ..cube.clone()
    })
}

/// Re-aggregates base facts with `dimension` at a strictly finer level.
/// A dimension rolled to ALL (or sliced away) counts as coarsest, so this
/// also re-attaches it. Recorded slice and dice filters still apply.
pub fn drill_down(cube: &Cube, dimension: &str, target: &str) -> Result<Cube> {
    let d = cube.schema.require_dimension(dimension)?;
    let new_level = require_level(cube, d, target)?;
    if matches!(cube.levels[d], Some(cur) if new_level >= cur) {
        return Err(CubeError::LevelOrder(format!(
            "'{target}' is not finer than '{}' on dimension '{dimension}'",
            level_name(cube, d)
        )));
    }
    let facts = cube.facts.as_ref().ok_or_else(|| {
        CubeError::UnsupportedDrill("cube holds no handle to its base facts".into())
    })?;
    let mut levels = cube.levels.clone();
    levels[d] = Some(new_level);
    let traced = parallel_group_aggregate(facts, &levels, &cube.filters, &cube.agg, &cube.config)?;
    Ok(Cube {
        levels,
        cells: traced.value,
        stats: traced.stats,
        ..cube.clone()
    })
}

/// Keeps the cells whose `dimension` component is `member`, then drops the
/// dimension. The restriction is recorded for later drill-downs.
pub fn slice(cube: &Cube, dimension: &str, member: &str) -> Result<Cube> {
    let d = cube.schema.require_dimension(dimension)?;
    let Some(level) = cube.levels[d] else {
        return Err(CubeError::Coordinate(format!(
            "dimension '{dimension}' is not part of the cube's coordinates"
        )));
    };
    let spec = cube.schema.dimension(d).level(level);
    let m = spec.member_index(member).ok_or_else(|| {
        CubeError::Coordinate(format!(
            "'{member}' is not a '{}' member of dimension '{dimension}'",
            spec.name()
        ))
    })?;
    let pos = cube.coordinate_position(d).expect("active");
    let cells = cube
        .cells
        .iter()
        .filter(|(coord, _)| coord[pos] == m)
        .map(|(coord, states)| {
            let mut key = coord.clone();
            key.remove(pos);
            (key, states.clone())
        })
        .collect();
    let mut levels = cube.levels.clone();
    levels[d] = None;
    let mut filters = cube.filters.clone();
    filters.restrict(&cube.schema, d, level, BTreeSet::from([m]));
    Ok(Cube {
        levels,
        filters,
        cells,
        ..cube.clone()
    })
}

/// Member sets per dimension name; a cell survives a dice when every named
/// component is in its set.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DiceFilter {
    sets: BTreeMap<String, BTreeSet<String>>,
}

impl DiceFilter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with<I, S>(mut self, dimension: &str, members: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.sets
            .entry(dimension.to_owned())
            .or_default()
            .extend(members.into_iter().map(Into::into));
        self
    }

    pub fn sets(&self) -> &BTreeMap<String, BTreeSet<String>> {
        &self.sets
    }

    /// Per-dimension intersection of two filters.
    pub fn and(&self, other: &DiceFilter) -> DiceFilter {
        let mut sets = self.sets.clone();
        for (dim, members) in &other.sets {
            sets.entry(dim.clone())
                .and_modify(|s| *s = s.intersection(members).cloned().collect())
                .or_insert_with(|| members.clone());
        }
        DiceFilter { sets }
    }
}

impl<K, V, S> FromIterator<(K, V)> for DiceFilter
where
    K: Into<String>,
    V: IntoIterator<Item = S>,
    S: Into<String>,
{
    fn from_iter<T: IntoIterator<Item = (K, V)>>(iter: T) -> Self {
        iter.into_iter()
            .fold(DiceFilter::new(), |f, (k, v)| f.with(&k.into(), v))
    }
}

/// Restricts several dimensions to member subsets, keeping all of them.
pub fn dice(cube: &Cube, filter: &DiceFilter) -> Result<Cube> {
    let mut masks: Vec<(usize, usize, BTreeSet<u32>)> = Vec::new();
    for (name, members) in &filter.sets {
        let d = cube
            .schema
            .dimension_index(name)
            .ok_or_else(|| CubeError::Filter(format!("unknown dimension '{name}'")))?;
        let Some(level) = cube.levels[d] else {
            return Err(CubeError::Filter(format!(
                "dimension '{name}' is not part of the cube's coordinates"
            )));
        };
        if members.is_empty() {
            return Err(CubeError::Filter(format!(
                "empty member set for dimension '{name}'"
            )));
        }
        let spec = cube.schema.dimension(d).level(level);
        let set = members
            .iter()
            .map(|m| {
                spec.member_index(m).ok_or_else(|| {
                    CubeError::Filter(format!(
                        "'{m}' is not a '{}' member of dimension '{name}'",
                        spec.name()
                    ))
                })
            })
            .collect::<Result<BTreeSet<u32>>>()?;
        masks.push((d, level, set));
    }

    let positions: Vec<(usize, &BTreeSet<u32>)> = masks
        .iter()
        .map(|(d, _, set)| (cube.coordinate_position(*d).expect("active"), set))
        .collect();
    let cells = cube
        .cells
        .iter()
        .filter(|(coord, _)| positions.iter().all(|(p, set)| set.contains(&coord[*p])))
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    let mut filters = cube.filters.clone();
    for (d, level, set) in masks {
        filters.restrict(&cube.schema, d, level, set);
    }
    Ok(Cube {
        filters,
        cells,
        ..cube.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregate::Value;
    use crate::cube::{build_cube, AggSpec};
    use crate::fixtures::{f6_facts, f6_schema};

    fn base() -> Cube {
        build_cube(f6_facts(), &AggSpec::defaults(&f6_schema())).unwrap()
    }

    fn sums(cube: &Cube) -> Vec<(Vec<String>, i64)> {
        cube.cells()
            .iter()
            .map(|(c, s)| match s[0].finalize() {
                Value::Int(v) => (cube.member_names(c), v),
                other => panic!("{other:?}"),
            })
            .collect()
    }

    fn row(names: &[&str], v: i64) -> (Vec<String>, i64) {
        (names.iter().map(|s| s.to_string()).collect(), v)
    }

    #[test]
    fn roll_geo_to_country() {
        let c = roll_up(&base(), "geo", "country").unwrap();
        assert_eq!(
            sums(&c),
            vec![
                row(&["US", "A", "Q1"], 10),
                row(&["US", "A", "Q2"], 30),
                row(&["US", "B", "Q1"], 20),
                row(&["US", "B", "Q2"], 60),
                row(&["DE", "A", "Q1"], 40),
                row(&["DE", "B", "Q2"], 50),
            ]
        );
    }

    #[test]
    fn roll_everything_to_all() {
        let c = roll_up(&base(), "geo", RollTarget::All).unwrap();
        let c = roll_up(&c, "product", "ALL").unwrap();
        let c = roll_up(&c, "quarter", "ALL").unwrap();
        assert_eq!(sums(&c), vec![(vec![], 210)]);
        assert_eq!(roll_up(&c, "quarter", "ALL").unwrap_err().code(), "level_order");
    }

    #[test]
    fn roll_up_requires_strictly_coarser() {
        let c = roll_up(&base(), "geo", "country").unwrap();
        assert_eq!(roll_up(&c, "geo", "country").unwrap_err().code(), "level_order");
        assert_eq!(roll_up(&c, "geo", "city").unwrap_err().code(), "level_order");
        assert_eq!(roll_up(&c, "geo", "planet").unwrap_err().code(), "schema");
        assert_eq!(roll_up(&c, "color", "ALL").unwrap_err().code(), "schema");
        assert_eq!(
            roll_up(&base(), "product", "product").unwrap_err().code(),
            "level_order"
        );
    }

    #[test]
    fn drill_down_round_trip() {
        let b = base();
        let up = roll_up(&b, "geo", "country").unwrap();
        assert_eq!(drill_down(&up, "geo", "city").unwrap(), b);
        assert_eq!(drill_down(&b, "geo", "city").unwrap_err().code(), "level_order");
        assert_eq!(
            drill_down(&up.without_facts(), "geo", "city").unwrap_err().code(),
            "unsupported_drill"
        );
    }

    #[test]
    fn drill_down_keeps_slice_filter() {
        let up = roll_up(&base(), "geo", "country").unwrap();
        let q1 = slice(&up, "quarter", "Q1").unwrap();
        let down = drill_down(&q1, "geo", "city").unwrap();
        assert_eq!(
            sums(&down),
            vec![row(&["NYC", "A"], 10), row(&["NYC", "B"], 20), row(&["BER", "A"], 40)]
        );
        assert_eq!(down.exact_total(0), Some(70));
    }

    #[test]
    fn drill_down_reattaches_absent_dimension() {
        let all = roll_up(&base(), "quarter", "ALL").unwrap();
        assert_eq!(drill_down(&all, "quarter", "quarter").unwrap(), base());
    }

    #[test]
    fn slice_q1() {
        let s = slice(&base(), "quarter", "Q1").unwrap();
        assert_eq!(
            sums(&s),
            vec![row(&["NYC", "A"], 10), row(&["NYC", "B"], 20), row(&["BER", "A"], 40)]
        );
        assert_eq!(slice(&base(), "geo", "US").unwrap_err().code(), "coordinate");
    }

    #[test]
    fn dice_examples() {
        let a = dice(&base(), &DiceFilter::new().with("product", ["A"])).unwrap();
        assert_eq!(
            sums(&a),
            vec![row(&["NYC", "A", "Q1"], 10), row(&["SFO", "A", "Q2"], 30), row(&["BER", "A", "Q1"], 40)]
        );
        let one = dice(
            &base(),
            &DiceFilter::new().with("product", ["A"]).with("quarter", ["Q2"]),
        )
        .unwrap();
        assert_eq!(sums(&one), vec![row(&["SFO", "A", "Q2"], 30)]);
    }

    #[test]
    fn dice_with_full_sets_is_identity() {
        let full = DiceFilter::new()
            .with("geo", ["NYC", "SFO", "BER"])
            .with("product", ["A", "B"])
            .with("quarter", ["Q1", "Q2"]);
        assert_eq!(dice(&base(), &full).unwrap(), base());
    }

    #[test]
    fn dice_errors() {
        let empty: [&str; 0] = [];
        assert_eq!(
            dice(&base(), &DiceFilter::new().with("product", empty)).unwrap_err().code(),
            "filter"
        );
        assert_eq!(
            dice(&base(), &DiceFilter::new().with("color", ["red"])).unwrap_err().code(),
            "filter"
        );
        assert_eq!(
            dice(&base(), &DiceFilter::new().with("geo", ["US"])).unwrap_err().code(),
            "filter"
        );
    }

    #[test]
    fn operations_leave_input_untouched() {
        let b = base();
        let snapshot = b.clone();
        let _ = roll_up(&b, "geo", "country").unwrap();
        let _ = slice(&b, "quarter", "Q1").unwrap();
        let _ = dice(&b, &DiceFilter::new().with("product", ["B"])).unwrap();
        assert_eq!(b, snapshot);
    }
}
