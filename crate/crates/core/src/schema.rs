//! Cube schema: dimensions with ordered hierarchy levels, and typed measures.
//!
//! The schema document is JSON:
//!
//! ```json
//! {
//!   "dimensions": [
//!     { "name": "geo", "levels": ["city", "country"],
//!       "members": { "city": ["NYC", "SFO", "BER"], "country": ["US", "DE"] },
//!       "parent": { "city": { "NYC": "US", "SFO": "US", "BER": "DE" } } }
//!   ],
//!   "measures": [ { "name": "sales", "kind": "integer", "aggregate": "sum" } ]
//! }
//! ```
//!
//! Levels run from finest to coarsest. `parent` is keyed by the child level and
//! must map every member of every non-top level onto a member of the next
//! level. Member order inside a level is the interning order, which is also
//! the order headers appear in views.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::aggregate::AggFn;
use crate::error::{CubeError, Result};

/// Value type of a measure column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasureKind {
    /// Signed 64-bit, aggregated exactly.
    Integer,
    /// binary64, summed with a compensation term.
    Real,
}

/// Serialized form of a schema. Convert with [`CubeSchema::try_from`].
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemaDocument {
    pub dimensions: Vec<DimensionDocument>,
    pub measures: Vec<MeasureDocument>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimensionDocument {
    pub name: String,
    pub levels: Vec<String>,
    pub members: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub parent: BTreeMap<String, BTreeMap<String, String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureDocument {
    pub name: String,
    pub kind: MeasureKind,
    #[serde(default)]
    pub aggregate: Option<AggFn>,
}

#[derive(Debug, Clone)]
pub struct Level {
    name: String,
    members: Vec<String>,
    index: HashMap<String, u32>,
    /// Parent index in the next-coarser level; empty on the top level.
    parents: Vec<u32>,
}

impl Level {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn members(&self) -> &[String] {
        &self.members
    }

    pub fn cardinality(&self) -> usize {
        self.members.len()
    }

    pub fn member_index(&self, member: &str) -> Option<u32> {
        self.index.get(member).copied()
    }
}

#[derive(Debug, Clone)]
pub struct DimensionSpec {
    name: String,
    levels: Vec<Level>,
    /// `ancestors[level][base]` is the member at `level` above base member `base`.
    ancestors: Vec<Vec<u32>>,
}

impl DimensionSpec {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn level(&self, level: usize) -> &Level {
        &self.levels[level]
    }

    pub fn level_index(&self, name: &str) -> Option<usize> {
        self.levels.iter().position(|l| l.name == name)
    }

    pub fn base(&self) -> &Level {
        &self.levels[0]
    }

    pub fn parent(&self, level: usize, member: u32) -> Option<u32> {
        self.levels[level].parents.get(member as usize).copied()
    }

    /// Walks the parent chain from `from` up to `to` (`to >= from`).
    pub fn lift(&self, from: usize, to: usize, mut member: u32) -> u32 {
        debug_assert!(to >= from);
        for level in from..to {
            member = self.levels[level].parents[member as usize];
        }
        member
    }

    /// Ancestor at `level` of a base member.
    pub fn ancestor(&self, base_member: u32, level: usize) -> u32 {
        self.ancestors[level][base_member as usize]
    }

    pub fn ancestor_table(&self, level: usize) -> &[u32] {
        &self.ancestors[level]
    }

    fn from_document(doc: DimensionDocument) -> Result<Self> {
        let DimensionDocument {
            name,
            levels: level_names,
            mut members,
            mut parent,
        } = doc;
        if name.is_empty() {
            return Err(CubeError::Schema("dimension name must be non-empty".into()));
        }
        if level_names.is_empty() {
            return Err(CubeError::Schema(format!(
                "dimension '{name}' declares no levels"
            )));
        }
        let mut seen = HashSet::new();
        for level in &level_names {
            if level.is_empty() || !seen.insert(level.as_str()) {
                return Err(CubeError::Schema(format!(
                    "dimension '{name}' has an empty or duplicate level name '{level}'"
                )));
            }
        }
        for key in members.keys().chain(parent.keys()) {
            if !seen.contains(key.as_str()) {
                return Err(CubeError::Schema(format!(
                    "dimension '{name}' refers to undeclared level '{key}'"
                )));
            }
        }

        let mut levels: Vec<Level> = Vec::with_capacity(level_names.len());
        for level_name in &level_names {
            let list = members.remove(level_name).unwrap_or_default();
            let mut index = HashMap::with_capacity(list.len());
            for (i, member) in list.iter().enumerate() {
                if member.is_empty() {
                    return Err(CubeError::Schema(format!(
                        "dimension '{name}' level '{level_name}' has an empty member"
                    )));
                }
                if index.insert(member.clone(), i as u32).is_some() {
                    return Err(CubeError::Schema(format!(
                        "dimension '{name}' level '{level_name}' repeats member '{member}'"
                    )));
                }
            }
            levels.push(Level {
                name: level_name.clone(),
                members: list,
                index,
                parents: Vec::new(),
            });
        }
        if levels[0].members.is_empty() {
            return Err(CubeError::Schema(format!(
                "dimension '{name}' has no base-level members"
            )));
        }

        let top = levels.len() - 1;
        if let Some(map) = parent.get(&level_names[top]) {
            if !map.is_empty() {
                return Err(CubeError::Schema(format!(
                    "dimension '{name}': top level '{}' cannot have parents",
                    level_names[top]
                )));
            }
        }
        for i in 0..top {
            let map = parent.remove(&level_names[i]).unwrap_or_default();
            let (child, coarser) = {
                let (lo, hi) = levels.split_at(i + 1);
                (&lo[i], &hi[0])
            };
            for key in map.keys() {
                if child.member_index(key).is_none() {
                    return Err(CubeError::Schema(format!(
                        "dimension '{name}': parent map names '{key}', which is not a '{}' member",
                        child.name
                    )));
                }
            }
            let mut parents = Vec::with_capacity(child.members.len());
            for member in &child.members {
                let Some(p) = map.get(member) else {
                    return Err(CubeError::Schema(format!(
                        "dimension '{name}': member '{member}' of level '{}' has no parent",
                        child.name
                    )));
                };
                let Some(pi) = coarser.member_index(p) else {
                    return Err(CubeError::Schema(format!(
                        "dimension '{name}': parent '{p}' of '{member}' is not a '{}' member",
                        coarser.name
                    )));
                };
                parents.push(pi);
            }
            levels[i].parents = parents;
        }

        let base_count = levels[0].members.len() as u32;
        let mut ancestors = Vec::with_capacity(levels.len());
        ancestors.push((0..base_count).collect::<Vec<_>>());
        for i in 1..levels.len() {
            let below: &Vec<u32> = &ancestors[i - 1];
            let row = below
                .iter()
                .map(|&m| levels[i - 1].parents[m as usize])
                .collect();
            ancestors.push(row);
        }

        Ok(Self {
            name,
            levels,
            ancestors,
        })
    }

    fn to_document(&self) -> DimensionDocument {
        let mut members = BTreeMap::new();
        let mut parent = BTreeMap::new();
        for (i, level) in self.levels.iter().enumerate() {
            members.insert(level.name.clone(), level.members.clone());
            if i + 1 < self.levels.len() {
                let coarser = &self.levels[i + 1];
                let map = level
                    .members
                    .iter()
                    .zip(&level.parents)
                    .map(|(m, &p)| (m.clone(), coarser.members[p as usize].clone()))
                    .collect();
                parent.insert(level.name.clone(), map);
            }
        }
        DimensionDocument {
            name: self.name.clone(),
            levels: self.levels.iter().map(|l| l.name.clone()).collect(),
            members,
            parent,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasureSpec {
    pub name: String,
    pub kind: MeasureKind,
    /// Aggregation used when a build does not name one for this measure.
    pub default_agg: AggFn,
}

#[derive(Debug, Clone)]
pub struct CubeSchema {
    dimensions: Vec<DimensionSpec>,
    measures: Vec<MeasureSpec>,
}

impl CubeSchema {
    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let doc: SchemaDocument = serde_json::from_slice(bytes)
            .map_err(|e| CubeError::Schema(format!("invalid schema document: {e}")))?;
        Self::try_from(doc)
    }

    pub fn to_document(&self) -> SchemaDocument {
        SchemaDocument {
            dimensions: self.dimensions.iter().map(|d| d.to_document()).collect(),
            measures: self
                .measures
                .iter()
                .map(|m| MeasureDocument {
                    name: m.name.clone(),
                    kind: m.kind,
                    aggregate: Some(m.default_agg),
                })
                .collect(),
        }
    }

    pub fn dimensions(&self) -> &[DimensionSpec] {
        &self.dimensions
    }

    pub fn dimension(&self, index: usize) -> &DimensionSpec {
        &self.dimensions[index]
    }

    pub fn measures(&self) -> &[MeasureSpec] {
        &self.measures
    }

    pub fn dimension_index(&self, name: &str) -> Option<usize> {
        self.dimensions.iter().position(|d| d.name == name)
    }

    pub fn measure_index(&self, name: &str) -> Option<usize> {
        self.measures.iter().position(|m| m.name == name)
    }

    pub(crate) fn require_dimension(&self, name: &str) -> Result<usize> {
        self.dimension_index(name)
            .ok_or_else(|| CubeError::Schema(format!("unknown dimension '{name}'")))
    }
}

impl TryFrom<SchemaDocument> for CubeSchema {
    type Error = CubeError;

    fn try_from(doc: SchemaDocument) -> Result<Self> {
        if doc.dimensions.is_empty() {
            return Err(CubeError::Schema("schema declares no dimensions".into()));
        }
        if doc.measures.is_empty() {
            return Err(CubeError::Schema("schema declares no measures".into()));
        }
        let mut names = HashSet::new();
        let dimensions = doc
            .dimensions
            .into_iter()
            .map(|d| {
                if !names.insert(d.name.clone()) {
                    return Err(CubeError::Schema(format!(
                        "duplicate dimension name '{}'",
                        d.name
                    )));
                }
                DimensionSpec::from_document(d)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut measure_names = HashSet::new();
        let measures = doc
            .measures
            .into_iter()
            .map(|m| {
                if m.name.is_empty() {
                    return Err(CubeError::Schema("measure name must be non-empty".into()));
                }
                if !measure_names.insert(m.name.clone()) {
                    return Err(CubeError::Schema(format!(
                        "duplicate measure name '{}'",
                        m.name
                    )));
                }
                Ok(MeasureSpec {
                    name: m.name,
                    kind: m.kind,
                    default_agg: m.aggregate.unwrap_or(AggFn::Sum),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            dimensions,
            measures,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GEO: &str = r#"{
        "dimensions": [
            {"name": "geo", "levels": ["city", "country"],
             "members": {"city": ["NYC", "SFO", "BER"], "country": ["US", "DE"]},
             "parent": {"city": {"NYC": "US", "SFO": "US", "BER": "DE"}}}
        ],
        "measures": [{"name": "sales", "kind": "integer"}]
    }"#;

    #[test]
    fn parses_hierarchy_and_ancestors() {
        let schema = CubeSchema::from_json(GEO.as_bytes()).unwrap();
        let geo = schema.dimension(0);
        assert_eq!(geo.levels().len(), 2);
        assert_eq!(geo.ancestor_table(1), &[0, 0, 1]);
        assert_eq!(geo.lift(0, 1, 2), 1);
        assert_eq!(schema.measures()[0].default_agg, AggFn::Sum);
    }

    #[test]
    fn round_trips_through_document() {
        let schema = CubeSchema::from_json(GEO.as_bytes()).unwrap();
        let again = CubeSchema::try_from(schema.to_document()).unwrap();
        assert_eq!(again.dimension(0).ancestor_table(1), &[0, 0, 1]);
    }

    #[test]
    fn rejects_missing_parent() {
        let bad = GEO.replace(r#", "BER": "DE""#, "");
        let err = CubeSchema::from_json(bad.as_bytes()).unwrap_err();
        assert!(matches!(err, CubeError::Schema(ref m) if m.contains("BER")), "{err}");
    }

    #[test]
    fn rejects_parent_outside_next_level() {
        let bad = GEO.replace(r#""BER": "DE""#, r#""BER": "FR""#);
        assert!(CubeSchema::from_json(bad.as_bytes()).is_err());
    }

    #[test]
    fn rejects_duplicate_member_and_zero_measures() {
        let dup = GEO.replace(r#"["NYC", "SFO", "BER"]"#, r#"["NYC", "NYC", "BER"]"#);
        assert!(CubeSchema::from_json(dup.as_bytes()).is_err());
        let none = GEO.replace(r#"[{"name": "sales", "kind": "integer"}]"#, "[]");
        let err = CubeSchema::from_json(none.as_bytes()).unwrap_err();
        assert_eq!(err.code(), "schema");
    }
}
