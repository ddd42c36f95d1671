#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::Arc;

use cube_core::{load_facts, CubeSchema, FactTable};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

/// Random small hierarchical dataset. Every dimension has 1-3 levels with
/// 1-3 children per parent; measures cover all five aggregate functions.
pub struct RandomDataset {
    pub schema_json: String,
    pub csv: String,
    pub dims: Vec<RandomDim>,
}

pub struct RandomDim {
    pub name: String,
    /// Level names finest first.
    pub levels: Vec<String>,
    /// Members per level, finest first.
    pub members: Vec<Vec<String>>,
}

pub fn random_dataset(seed: u64) -> RandomDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_dims = rng.gen_range(1..=3);
    let mut dims = Vec::new();
    let mut dim_docs = Vec::new();
    for d in 0..n_dims {
        let name = format!("d{d}");
        let n_levels = rng.gen_range(1..=3);
        // Build top-down, then reverse to finest-first.
        let mut members: Vec<Vec<String>> = Vec::new();
        let mut parents: Vec<BTreeMap<String, String>> = Vec::new();
        let top: Vec<String> = (0..rng.gen_range(1..=3)).map(|i| format!("{name}L{}_{i}", n_levels - 1)).collect();
        members.push(top);
        for l in (0..n_levels - 1).rev() {
            let mut level = Vec::new();
            let mut parent = BTreeMap::new();
            for p in members.last().unwrap().clone() {
                for _ in 0..rng.gen_range(1..=3) {
                    let m = format!("{name}L{l}_{}", level.len());
                    parent.insert(m.clone(), p.clone());
                    level.push(m);
                }
            }
            members.push(level);
            parents.push(parent);
        }
        members.reverse();
        parents.reverse();
        let levels: Vec<String> = (0..n_levels).map(|l| format!("{name}_l{l}")).collect();
        let members_doc: BTreeMap<_, _> = levels.iter().cloned().zip(members.iter().cloned()).collect();
        let parent_doc: BTreeMap<_, _> = levels.iter().cloned().zip(parents.iter().cloned()).collect();
        dim_docs.push(json!({"name": name, "levels": levels, "members": members_doc, "parent": parent_doc}));
        dims.push(RandomDim { name, levels, members });
    }
    let schema = json!({
        "dimensions": dim_docs,
        "measures": [
            {"name": "v", "kind": "integer", "aggregate": "sum"},
            {"name": "n", "kind": "integer", "aggregate": "count"},
            {"name": "lo", "kind": "integer", "aggregate": "min"},
            {"name": "hi", "kind": "integer", "aggregate": "max"},
            {"name": "avg", "kind": "integer", "aggregate": "mean"},
        ]
    });

    let rows = rng.gen_range(1..=40);
    let mut csv = dims.iter().map(|d| d.name.clone()).collect::<Vec<_>>().join(",");
    csv.push_str(",v,n,lo,hi,avg\n");
    for _ in 0..rows {
        for d in &dims {
            let base = &d.members[0];
            csv.push_str(&base[rng.gen_range(0..base.len())]);
            csv.push(',');
        }
        let vals: Vec<String> = (0..5).map(|_| rng.gen_range(-50i64..50).to_string()).collect();
        csv.push_str(&vals.join(","));
        csv.push('\n');
    }
    RandomDataset {
        schema_json: schema.to_string(),
        csv,
        dims,
    }
}

impl RandomDataset {
    pub fn facts(&self) -> Arc<FactTable> {
        let schema = Arc::new(CubeSchema::from_json(self.schema_json.as_bytes()).unwrap());
        let mut facts = load_facts(self.csv.as_bytes(), schema).unwrap();
        assert!(facts.validate().ok);
        Arc::new(facts)
    }
}
