//! Fact tables: CSV ingestion, pitfall validation and member interning.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::aggregate::Value;
use crate::error::{CubeError, Result};
use crate::schema::{CubeSchema, MeasureKind};

/// Dictionary-encoded column of raw member strings.
#[derive(Debug, Clone, Default)]
struct RawColumn {
    dictionary: Vec<String>,
    lookup: HashMap<String, u32>,
    codes: Vec<u32>,
}

impl RawColumn {
    fn push(&mut self, value: &str) {
        let code = match self.lookup.get(value) {
            Some(&c) => c,
            None => {
                let c = self.dictionary.len() as u32;
                self.dictionary.push(value.to_owned());
                self.lookup.insert(value.to_owned(), c);
                c
            }
        };
        self.codes.push(code);
    }

    fn get(&self, row: usize) -> &str {
        &self.dictionary[self.codes[row] as usize]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeasureColumn {
    Integer(Vec<i64>),
    Real(Vec<f64>),
}

impl MeasureColumn {
    fn new(kind: MeasureKind) -> Self {
        match kind {
            MeasureKind::Integer => MeasureColumn::Integer(Vec::new()),
            MeasureKind::Real => MeasureColumn::Real(Vec::new()),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            MeasureColumn::Integer(v) => v.len(),
            MeasureColumn::Real(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn value(&self, row: usize) -> Value {
        match self {
            MeasureColumn::Integer(v) => Value::Int(v[row]),
            MeasureColumn::Real(v) => Value::Real(v[row]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrphanReference {
    /// 1-based data row.
    pub row: usize,
    pub dimension: String,
    /// Base level the reference was expected at.
    pub level: String,
    pub member: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GranularityViolation {
    pub dimension: String,
    /// 1-based data rows holding coarser-level members.
    pub rows: Vec<usize>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub orphan_references: Vec<OrphanReference>,
    pub granularity_violations: Vec<GranularityViolation>,
    pub ok: bool,
}

/// Columnar fact rows at base granularity.
///
/// Dimension cells stay raw strings until [`FactTable::validate`] succeeds,
/// at which point they are interned to base-level member indices.
#[derive(Debug, Clone)]
pub struct FactTable {
    schema: Arc<CubeSchema>,
    rows: usize,
    dims: Vec<RawColumn>,
    measures: Vec<MeasureColumn>,
    resolved: Option<Vec<Vec<u32>>>,
}

impl FactTable {
    pub fn schema(&self) -> &Arc<CubeSchema> {
        &self.schema
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn measure(&self, index: usize) -> &MeasureColumn {
        &self.measures[index]
    }

    /// Raw member string of dimension `dim` on 0-based row `row`.
    pub fn member(&self, row: usize, dim: usize) -> &str {
        self.dims[dim].get(row)
    }

    pub fn is_validated(&self) -> bool {
        self.resolved.is_some()
    }

    /// Base-level member indices per dimension; present after a clean validation.
    pub fn resolved(&self) -> Option<&[Vec<u32>]> {
        self.resolved.as_deref()
    }

    /// Checks every dimension reference against the schema and, when all of
    /// them resolve to base-level members, interns them for aggregation.
    ///
    /// References to members declared only at a coarser level are reported
    /// as granularity violations; references to undeclared members are
    /// orphans. Findings never fail the call.
    pub fn validate(&mut self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let mut resolved = Vec::with_capacity(self.dims.len());

        for (d, column) in self.dims.iter().enumerate() {
            let dim = self.schema.dimension(d);
            let base = dim.base();
            // Per dictionary entry: Ok(base index) or Err(Some(coarser level)) / Err(None).
            let lookup: Vec<std::result::Result<u32, Option<usize>>> = column
                .dictionary
                .iter()
                .map(|m| match base.member_index(m) {
                    Some(i) => Ok(i),
                    None => Err((1..dim.levels().len())
                        .find(|&l| dim.level(l).member_index(m).is_some())),
                })
                .collect();

            if lookup.iter().all(|r| r.is_ok()) {
                resolved.push(
                    column
                        .codes
                        .iter()
                        .map(|&c| *lookup[c as usize].as_ref().unwrap())
                        .collect(),
                );
                continue;
            }

            let mut coarse_rows = Vec::new();
            let mut notes = Vec::new();
            for (row, &code) in column.codes.iter().enumerate() {
                match lookup[code as usize] {
                    Ok(_) => {}
                    Err(None) => report.orphan_references.push(OrphanReference {
                        row: row + 1,
                        dimension: dim.name().to_owned(),
                        level: base.name().to_owned(),
                        member: column.dictionary[code as usize].clone(),
                    }),
                    Err(Some(level)) => {
                        coarse_rows.push(row + 1);
                        if notes.len() < 5 {
                            notes.push(format!(
                                "row {}: '{}' is a '{}' member, expected base level '{}'",
                                row + 1,
                                column.dictionary[code as usize],
                                dim.level(level).name(),
                                base.name()
                            ));
                        }
                    }
                }
            }
            if !coarse_rows.is_empty() {
                if coarse_rows.len() > notes.len() {
                    notes.push(format!("and {} more", coarse_rows.len() - notes.len()));
                }
                report.granularity_violations.push(GranularityViolation {
                    dimension: dim.name().to_owned(),
                    rows: coarse_rows,
                    detail: notes.join("; "),
                });
            }
        }

        report.ok = report.orphan_references.is_empty() && report.granularity_violations.is_empty();
        self.resolved = report.ok.then_some(resolved);
        report
    }

    /// Serializes the table back to CSV with the schema's column order.
    pub fn to_csv(&self) -> Vec<u8> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        let header: Vec<&str> = self
            .schema
            .dimensions()
            .iter()
            .map(|d| d.name())
            .chain(self.schema.measures().iter().map(|m| m.name.as_str()))
            .collect();
        writer.write_record(&header).expect("in-memory write");
        let mut record: Vec<String> = Vec::with_capacity(header.len());
        for row in 0..self.rows {
            record.clear();
            record.extend(self.dims.iter().map(|c| c.get(row).to_owned()));
            record.extend(self.measures.iter().map(|m| m.value(row).to_string()));
            writer.write_record(&record).expect("in-memory write");
        }
        writer.into_inner().expect("in-memory flush")
    }
}

/// Parses fact CSV bytes against `schema`.
///
/// Columns are matched by header name (dimension name or measure name); extra
/// columns are ignored. Row numbers in errors are 1-based data rows.
pub fn load_facts(csv_bytes: &[u8], schema: Arc<CubeSchema>) -> Result<FactTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(csv_bytes);
    let headers = reader
        .headers()
        .map_err(|e| CubeError::Parse {
            row: 0,
            column: String::new(),
            message: e.to_string(),
        })?
        .clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(CubeError::EmptyTable);
    }
    let position = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| CubeError::SchemaMismatch(name.to_owned()))
    };
    let dim_cols = schema
        .dimensions()
        .iter()
        .map(|d| position(d.name()))
        .collect::<Result<Vec<_>>>()?;
    let measure_cols = schema
        .measures()
        .iter()
        .map(|m| position(&m.name))
        .collect::<Result<Vec<_>>>()?;

    let mut builder = FactTableBuilder::new(schema);
    let mut record = csv::StringRecord::new();
    let mut row = 0usize;
    loop {
        match reader.read_record(&mut record) {
            Ok(true) => {}
            Ok(false) => break,
            Err(e) => {
                return Err(CubeError::Parse {
                    row: row + 1,
                    column: String::new(),
                    message: e.to_string(),
                })
            }
        }
        row += 1;
        for (d, &col) in dim_cols.iter().enumerate() {
            builder.dims[d].push(&record[col]);
        }
        for (m, &col) in measure_cols.iter().enumerate() {
            let cell = record[col].trim();
            let parse_err = |message: String| CubeError::Parse {
                row,
                column: builder.schema.measures()[m].name.clone(),
                message,
            };
            match &mut builder.measures[m] {
                MeasureColumn::Integer(v) => v.push(
                    cell.parse::<i64>()
                        .map_err(|e| parse_err(format!("'{cell}' is not a 64-bit integer: {e}")))?,
                ),
                MeasureColumn::Real(v) => {
                    let x = cell
                        .parse::<f64>()
                        .map_err(|e| parse_err(format!("'{cell}' is not a number: {e}")))?;
                    if !x.is_finite() {
                        return Err(parse_err(format!("'{cell}' is not finite")));
                    }
                    v.push(x);
                }
            }
        }
        builder.rows += 1;
    }
    builder.finish()
}

/// Row-at-a-time construction, used for synthetic tables.
#[derive(Debug)]
pub struct FactTableBuilder {
    schema: Arc<CubeSchema>,
    rows: usize,
    dims: Vec<RawColumn>,
    measures: Vec<MeasureColumn>,
}

impl FactTableBuilder {
    pub fn new(schema: Arc<CubeSchema>) -> Self {
        let dims = vec![RawColumn::default(); schema.dimensions().len()];
        let measures = schema
            .measures()
            .iter()
            .map(|m| MeasureColumn::new(m.kind))
            .collect();
        Self {
            schema,
            rows: 0,
            dims,
            measures,
        }
    }

    pub fn push_row(&mut self, members: &[&str], values: &[Value]) -> Result<()> {
        if members.len() != self.dims.len() || values.len() != self.measures.len() {
            return Err(CubeError::Parse {
                row: self.rows + 1,
                column: String::new(),
                message: format!(
                    "expected {} members and {} values",
                    self.dims.len(),
                    self.measures.len()
                ),
            });
        }
        for (m, (column, value)) in self.measures.iter().zip(values).enumerate() {
            let ok = matches!(
                (column, value),
                (MeasureColumn::Integer(_), Value::Int(_)) | (MeasureColumn::Real(_), Value::Real(_))
            );
            if !ok || matches!(value, Value::Real(x) if !x.is_finite()) {
                return Err(CubeError::Parse {
                    row: self.rows + 1,
                    column: self.schema.measures()[m].name.clone(),
                    message: format!("value {value} does not match the measure kind"),
                });
            }
        }
        for (column, member) in self.dims.iter_mut().zip(members) {
            column.push(member);
        }
        for (column, value) in self.measures.iter_mut().zip(values) {
            match (column, value) {
                (MeasureColumn::Integer(v), Value::Int(x)) => v.push(*x),
                (MeasureColumn::Real(v), Value::Real(x)) => v.push(*x),
                _ => unreachable!("checked above"),
            }
        }
        self.rows += 1;
        Ok(())
    }

    pub fn finish(self) -> Result<FactTable> {
        if self.rows == 0 {
            return Err(CubeError::EmptyTable);
        }
        Ok(FactTable {
            schema: self.schema,
            rows: self.rows,
            dims: self.dims,
            measures: self.measures,
            resolved: None,
        })
    }
}

/// Column sums of the integer measures, keyed by measure name. Test helper
/// for conservation checks.
pub fn integer_column_sums(facts: &FactTable) -> BTreeMap<String, i128> {
    facts
        .schema()
        .measures()
        .iter()
        .enumerate()
        .filter_map(|(i, m)| match facts.measure(i) {
            MeasureColumn::Integer(v) => {
                Some((m.name.clone(), v.iter().map(|&x| x as i128).sum()))
            }
            MeasureColumn::Real(_) => None,
        })
        .collect()
}
