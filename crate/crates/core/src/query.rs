//! Query and result documents shared by the CLI and the embedding bridge.
//!
//! A query document is a JSON array of operations, or an object with an
//! `operations` array:
//!
//! ```json
//! [ {"op": "slice", "dimension": "quarter", "member": "Q1"},
//!   {"op": "view", "rows": ["geo", "product"], "cols": []} ]
//! ```
//!
//! Operations: `rollup {dimension, level}` (level may be `"ALL"`),
//! `drilldown {dimension, level}`, `slice {dimension, member}`,
//! `dice {filter: {dimension: [members]}}`, `view {rows, cols}` and
//! `pivot {rows, cols}`. Cube operations after a `view` keep the arrangement,
//! dropping dimensions that disappear and appending re-attached ones to the
//! rows. Without any `view`, rows hold every retained dimension except the
//! last, which goes on columns.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::aggregate::{AggFn, Value};
use crate::cube::{build_cube_with, AggSpec, Cube};
use crate::error::{CubeError, Result};
use crate::facts::{load_facts, ValidationReport};
use crate::ops::{dice, drill_down, roll_up, slice, DiceFilter};
use crate::parallel::ParallelConfig;
use crate::schema::CubeSchema;
use crate::view::{pivot, CubeView};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase", deny_unknown_fields)]
pub enum Operation {
    Rollup { dimension: String, level: String },
    Drilldown { dimension: String, level: String },
    Slice { dimension: String, member: String },
    Dice { filter: BTreeMap<String, Vec<String>> },
    View { rows: Vec<String>, cols: Vec<String> },
    Pivot { rows: Vec<String>, cols: Vec<String> },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryDocument {
    pub operations: Vec<Operation>,
}

impl QueryDocument {
    pub fn parse(bytes: &[u8]) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_slice(bytes)
            .map_err(|e| CubeError::Query(format!("invalid JSON: {e}")))?;
        let list = match value {
            serde_json::Value::Array(list) => list,
            serde_json::Value::Object(mut obj) => match obj.remove("operations") {
                Some(serde_json::Value::Array(list)) if obj.is_empty() => list,
                _ => {
                    return Err(CubeError::Query(
                        "expected an array of operations or {\"operations\": [...]}".into(),
                    ))
                }
            },
            _ => {
                return Err(CubeError::Query(
                    "expected an array of operations or {\"operations\": [...]}".into(),
                ))
            }
        };
        let operations = list
            .into_iter()
            .enumerate()
            .map(|(i, op)| {
                serde_json::from_value(op)
                    .map_err(|e| CubeError::Query(format!("operation {}: {e}", i + 1)))
            })
            .collect::<Result<_>>()?;
        Ok(Self { operations })
    }

    pub fn to_json(&self) -> Vec<u8> {
        serde_json::to_vec(&self.operations).expect("operations serialize")
    }
}

/// A cube plus the axis arrangement chosen so far.
#[derive(Debug, Clone)]
pub struct QueryState {
    cube: Arc<Cube>,
    axes: Option<(Vec<usize>, Vec<usize>)>,
}

impl QueryState {
    pub fn new(cube: Arc<Cube>) -> Self {
        Self { cube, axes: None }
    }

    pub fn cube(&self) -> &Arc<Cube> {
        &self.cube
    }

    fn with_cube(&self, cube: Cube) -> Self {
        let axes = self.axes.as_ref().map(|(rows, cols)| {
            let keep = |d: &&usize| cube.levels()[**d].is_some();
            let mut rows: Vec<usize> = rows.iter().filter(keep).copied().collect();
            let cols: Vec<usize> = cols.iter().filter(keep).copied().collect();
            for d in cube.active_dimensions() {
                if !rows.contains(&d) && !cols.contains(&d) {
                    rows.push(d);
                }
            }
            (rows, cols)
        });
        Self {
            cube: Arc::new(cube),
            axes,
        }
    }

    fn current_axes(&self) -> (Vec<usize>, Vec<usize>) {
        match &self.axes {
            Some(axes) => axes.clone(),
            None => {
                let mut rows = self.cube.active_dimensions();
                let cols = rows.pop().into_iter().collect();
                (rows, cols)
            }
        }
    }

    pub fn apply(&self, op: &Operation) -> Result<Self> {
        fn strs(v: &[String]) -> Vec<&str> {
            v.iter().map(String::as_str).collect()
        }
        match op {
            Operation::Rollup { dimension, level } => {
                Ok(self.with_cube(roll_up(&self.cube, dimension, level.as_str())?))
            }
            Operation::Drilldown { dimension, level } => {
                Ok(self.with_cube(drill_down(&self.cube, dimension, level)?))
            }
            Operation::Slice { dimension, member } => {
                Ok(self.with_cube(slice(&self.cube, dimension, member)?))
            }
            Operation::Dice { filter } => {
                let filter: DiceFilter = filter.iter().map(|(k, v)| (k.as_str(), v.iter().cloned())).collect();
                Ok(self.with_cube(dice(&self.cube, &filter)?))
            }
            Operation::View { rows, cols } => {
                let view = crate::view::to_view(self.cube.clone(), &strs(rows), &strs(cols))?;
                Ok(Self {
                    cube: self.cube.clone(),
                    axes: Some((view.row_axes().to_vec(), view.col_axes().to_vec())),
                })
            }
            Operation::Pivot { rows, cols } => {
                let view = self.view()?;
                let pivoted = pivot(&view, &strs(rows), &strs(cols))?;
                Ok(Self {
                    cube: self.cube.clone(),
                    axes: Some((pivoted.row_axes().to_vec(), pivoted.col_axes().to_vec())),
                })
            }
        }
    }

    pub fn apply_all<'a>(&self, ops: impl IntoIterator<Item = &'a Operation>) -> Result<Self> {
        let mut state = self.clone();
        for op in ops {
            state = state.apply(op)?;
        }
        Ok(state)
    }

    pub fn view(&self) -> Result<CubeView> {
        let (rows, cols) = self.current_axes();
        CubeView::materialize(self.cube.clone(), rows, cols)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisInfo {
    pub dimension: String,
    pub level: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureGrid {
    pub name: String,
    pub aggregate: AggFn,
    /// `values[row][col]`, `null` where the cube has no cell.
    pub values: Vec<Vec<Option<Value>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub row_axes: Vec<AxisInfo>,
    pub col_axes: Vec<AxisInfo>,
    pub row_headers: Vec<Vec<String>>,
    pub col_headers: Vec<Vec<String>>,
    pub measures: Vec<MeasureGrid>,
}

impl ResultDocument {
    pub fn from_view(view: &CubeView) -> Self {
        let cube = view.cube();
        let schema = cube.schema();
        let axis = |axes: &[usize]| -> Vec<AxisInfo> {
            axes.iter()
                .map(|&d| {
                    let dim = schema.dimension(d);
                    AxisInfo {
                        dimension: dim.name().to_owned(),
                        level: dim.level(cube.levels()[d].expect("active")).name().to_owned(),
                    }
                })
                .collect()
        };
        let measures = schema
            .measures()
            .iter()
            .zip(cube.agg().funcs())
            .enumerate()
            .map(|(m, (spec, &func))| MeasureGrid {
                name: spec.name.clone(),
                aggregate: func,
                values: (0..view.n_rows())
                    .map(|r| {
                        (0..view.n_cols())
                            .map(|c| view.value(r, c).map(|v| v[m]))
                            .collect()
                    })
                    .collect(),
            })
            .collect();
        Self {
            row_axes: axis(view.row_axes()),
            col_axes: axis(view.col_axes()),
            row_headers: view
                .row_headers()
                .iter()
                .map(|h| view.header_names(view.row_axes(), h))
                .collect(),
            col_headers: view
                .col_headers()
                .iter()
                .map(|h| view.header_names(view.col_axes(), h))
                .collect(),
            measures,
        }
    }

    pub fn to_json(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("result document serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<ValidationReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorDocument {
    pub error: ErrorBody,
}

impl From<&CubeError> for ErrorDocument {
    fn from(err: &CubeError) -> Self {
        let report = match err {
            CubeError::Validation(r) => Some((**r).clone()),
            _ => None,
        };
        Self {
            error: ErrorBody {
                code: err.code().to_owned(),
                message: err.to_string(),
                report,
            },
        }
    }
}

impl ErrorDocument {
    pub fn to_json(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("error document serializes")
    }
}

/// Parses, validates and aggregates a dataset into its base cube using each
/// measure's default aggregation.
pub fn open_dataset(schema_json: &[u8], facts_csv: &[u8], config: ParallelConfig) -> Result<Arc<Cube>> {
    let schema = Arc::new(CubeSchema::from_json(schema_json)?);
    let mut facts = load_facts(facts_csv, schema.clone())?;
    let report = facts.validate();
    if !report.ok {
        return Err(CubeError::Validation(Box::new(report)));
    }
    let agg = AggSpec::defaults(&schema);
    Ok(Arc::new(build_cube_with(Arc::new(facts), &agg, config)?))
}

/// Runs a query document against a base cube and renders the result.
pub fn run_query(base: &Arc<Cube>, query_json: &[u8]) -> Result<ResultDocument> {
    let doc = QueryDocument::parse(query_json)?;
    let state = QueryState::new(base.clone()).apply_all(&doc.operations)?;
    Ok(ResultDocument::from_view(&state.view()?))
}

/// End-to-end query: result document bytes on success, error document bytes
/// otherwise.
pub fn execute(schema_json: &[u8], facts_csv: &[u8], query_json: &[u8]) -> std::result::Result<Vec<u8>, Vec<u8>> {
    open_dataset(schema_json, facts_csv, ParallelConfig::default())
        .and_then(|cube| run_query(&cube, query_json))
        .map(|doc| doc.to_json())
        .map_err(|e| ErrorDocument::from(&e).to_json())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{F6_FACTS_CSV, F6_SCHEMA_JSON};

    fn run(query: &str) -> std::result::Result<ResultDocument, ErrorDocument> {
        match execute(F6_SCHEMA_JSON.as_bytes(), F6_FACTS_CSV.as_bytes(), query.as_bytes()) {
            Ok(bytes) => Ok(serde_json::from_slice(&bytes).unwrap()),
            Err(bytes) => Err(serde_json::from_slice(&bytes).unwrap()),
        }
    }

    fn total(doc: &ResultDocument) -> f64 {
        doc.measures[0].values.iter().flatten().flatten().map(|v| v.as_f64()).sum()
    }

    #[test]
    fn parses_both_document_shapes() {
        let a = QueryDocument::parse(br#"[{"op":"slice","dimension":"quarter","member":"Q1"}]"#).unwrap();
        let b = QueryDocument::parse(br#"{"operations":[{"op":"slice","dimension":"quarter","member":"Q1"}]}"#).unwrap();
        assert_eq!(a, b);
        assert_eq!(QueryDocument::parse(&a.to_json()).unwrap(), a);
    }

    #[test]
    fn rejects_malformed_operations() {
        for bad in [
            "{",
            "42",
            r#"[{"op":"explode"}]"#,
            r#"[{"op":"slice","dimension":"quarter"}]"#,
            r#"[{"op":"slice","dimension":"quarter","member":"Q1","extra":1}]"#,
        ] {
            assert_eq!(QueryDocument::parse(bad.as_bytes()).unwrap_err().code(), "query", "{bad}");
        }
    }

    #[test]
    fn empty_query_is_full_base_view() {
        let doc = run("[]").unwrap();
        assert_eq!(doc.row_axes.len(), 2);
        assert_eq!(doc.col_headers, vec![vec!["Q1".to_string()], vec!["Q2".to_string()]]);
        assert_eq!(total(&doc), 210.0);
    }

    #[test]
    fn slice_then_view_totals_70() {
        let doc = run(r#"[{"op":"slice","dimension":"quarter","member":"Q1"},
                          {"op":"view","rows":["geo","product"],"cols":[]}]"#)
        .unwrap();
        assert_eq!(doc.col_headers, vec![Vec::<String>::new()]);
        assert_eq!(total(&doc), 70.0);
    }

    #[test]
    fn arrangement_survives_cube_operations() {
        let doc = run(r#"[{"op":"view","rows":["quarter"],"cols":["geo","product"]},
                          {"op":"rollup","dimension":"geo","level":"ALL"},
                          {"op":"drilldown","dimension":"geo","level":"country"}]"#)
        .unwrap();
        let dims: Vec<&str> = doc.row_axes.iter().map(|a| a.dimension.as_str()).collect();
        assert_eq!(dims, ["quarter", "geo"]);
        assert_eq!(doc.col_axes[0].dimension, "product");
        assert_eq!(doc.row_axes[1].level, "country");
    }

    #[test]
    fn errors_become_documents() {
        let err = run(r#"[{"op":"slice","dimension":"color","member":"red"}]"#).unwrap_err();
        assert_eq!(err.error.code, "schema");
        let csv = format!("{F6_FACTS_CSV}LAX,A,Q1,5\n");
        let bytes = execute(F6_SCHEMA_JSON.as_bytes(), csv.as_bytes(), b"[]").unwrap_err();
        let doc: ErrorDocument = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(doc.error.code, "validation");
        assert_eq!(doc.error.report.unwrap().orphan_references.len(), 1);
    }
}
