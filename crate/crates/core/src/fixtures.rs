//! The six-row reference dataset: geo (city -> country), product, quarter,
//! and an integer `sales` measure totalling 210.

use std::sync::Arc;

use crate::facts::{load_facts, FactTable};
use crate::schema::CubeSchema;

pub const F6_SCHEMA_JSON: &str = include_str!("../fixtures/f6.schema.json");
pub const F6_FACTS_CSV: &str = include_str!("../fixtures/f6.facts.csv");

pub fn f6_schema() -> Arc<CubeSchema> {
    Arc::new(CubeSchema::from_json(F6_SCHEMA_JSON.as_bytes()).expect("fixture schema"))
}

pub fn f6_csv() -> &'static str {
    F6_FACTS_CSV
}

/// Loaded and validated F6 facts.
pub fn f6_facts() -> Arc<FactTable> {
    let mut facts = load_facts(F6_FACTS_CSV.as_bytes(), f6_schema()).expect("fixture facts");
    assert!(facts.validate().ok);
    Arc::new(facts)
}
