//! Seeded synthetic star schemas.

use std::sync::Arc;

use cube_core::{CubeSchema, FactTable, FactTableBuilder, Value};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{BenchError, Result};

/// Members of a dimension's `item` level are grouped this many to a `group`.
pub const GROUP_FANOUT: usize = 4;

/// Shape of a synthetic fact table.
///
/// Dimension `dimK` has levels `item` (the given cardinality) and `group`;
/// measure `sales` is an integer in `0..1000` aggregated by sum, and when
/// `real_measure` is set a second measure `price` holds reals aggregated by
/// mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub rows: usize,
    pub cardinalities: Vec<usize>,
    pub seed: u64,
    #[serde(default)]
    pub real_measure: bool,
}

impl SyntheticSpec {
    /// Parses a cardinality list such as `100x10x4`.
    pub fn parse_dims(spec: &str) -> Result<Vec<usize>> {
        spec.split(['x', 'X', ','])
            .map(|p| match p.trim().parse::<usize>() {
                Ok(n) if n > 0 => Ok(n),
                _ => Err(BenchError::Config(format!("bad dimension cardinality '{p}' in '{spec}'"))),
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 {
            return Err(BenchError::Config("rows must be at least 1".into()));
        }
        if self.cardinalities.is_empty() || self.cardinalities.contains(&0) {
            return Err(BenchError::Config("every dimension needs at least one member".into()));
        }
        Ok(())
    }

    pub fn schema_json(&self) -> String {
        let dims: Vec<_> = self
            .cardinalities
            .iter()
            .enumerate()
            .map(|(d, &n)| {
                let items: Vec<String> = (0..n).map(|i| item_name(d, i)).collect();
                let groups: Vec<String> = (0..n.div_ceil(GROUP_FANOUT)).map(|g| group_name(d, g)).collect();
                let parent: serde_json::Map<_, _> = (0..n)
                    .map(|i| (item_name(d, i), json!(group_name(d, i / GROUP_FANOUT))))
                    .collect();
                json!({
                    "name": format!("dim{d}"),
                    "levels": ["item", "group"],
                    "members": {"item": items, "group": groups},
                    "parent": {"item": parent},
                })
            })
            .collect();
        let mut measures = vec![json!({"name": "sales", "kind": "integer", "aggregate": "sum"})];
        if self.real_measure {
            measures.push(json!({"name": "price", "kind": "real", "aggregate": "mean"}));
        }
        json!({"dimensions": dims, "measures": measures}).to_string()
    }
}

fn item_name(d: usize, i: usize) -> String {
    format!("d{d}i{i}")
}

fn group_name(d: usize, g: usize) -> String {
    format!("d{d}g{g}")
}

/// Builds the schema and a validated fact table. Identical specs give
/// identical tables.
pub fn synthetic_dataset(spec: &SyntheticSpec) -> Result<(Arc<CubeSchema>, FactTable)> {
    spec.validate()?;
    let schema = Arc::new(CubeSchema::from_json(spec.schema_json().as_bytes())?);
    let names: Vec<Vec<String>> = spec
        .cardinalities
        .iter()
        .enumerate()
        .map(|(d, &n)| (0..n).map(|i| item_name(d, i)).collect())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut builder = FactTableBuilder::new(schema.clone());
    let mut members: Vec<&str> = Vec::with_capacity(names.len());
    let mut values = Vec::with_capacity(2);
    for _ in 0..spec.rows {
        members.clear();
        for column in &names {
            members.push(&column[rng.gen_range(0..column.len())]);
        }
        values.clear();
        values.push(Value::Int(rng.gen_range(0..1000)));
        if spec.real_measure {
            // Cents, so the CSV form is short but sums still round.
            values.push(Value::Real(rng.gen_range(0..100_000) as f64 / 100.0));
        }
        builder.push_row(&members, &values)?;
    }
    let mut facts = builder.finish()?;
    let report = facts.validate();
    debug_assert!(report.ok, "synthetic facts are valid by construction");
    Ok((schema, facts))
}
