//! Row/column arrangements of a cube (pivot tables).

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::sync::Arc;

use crate::aggregate::Value;
use crate::cube::{finalize, Coord, Cube};
use crate::error::{CubeError, Result};

/// Largest dense grid a view will materialize.
pub const MAX_GRID_CELLS: usize = 16 * 1024 * 1024;

/// A cube laid out with some dimensions on rows and the rest on columns.
///
/// Headers are the distinct member tuples that occur in the cube's cells,
/// sorted by member interning order. Grid entries without a cube cell are
/// `None`.
#[derive(Debug, Clone)]
pub struct CubeView {
    cube: Arc<Cube>,
    row_axes: Vec<usize>,
    col_axes: Vec<usize>,
    row_headers: Vec<Coord>,
    col_headers: Vec<Coord>,
    /// Row-major, `row_headers.len() * col_headers.len()` entries.
    grid: Vec<Option<Vec<Value>>>,
}

fn resolve_axes(cube: &Cube, rows: &[&str], cols: &[&str]) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut seen = HashSet::new();
    let mut lookup = |name: &str| -> Result<usize> {
        let d = cube
            .schema()
            .dimension_index(name)
            .ok_or_else(|| CubeError::Axis(format!("unknown dimension '{name}'")))?;
        if cube.levels()[d].is_none() {
            return Err(CubeError::Axis(format!(
                "dimension '{name}' is not part of the cube's coordinates"
            )));
        }
        if !seen.insert(d) {
            return Err(CubeError::Axis(format!("dimension '{name}' is on more than one axis")));
        }
        Ok(d)
    };
    let row_axes = rows.iter().map(|n| lookup(n)).collect::<Result<Vec<_>>>()?;
    let col_axes = cols.iter().map(|n| lookup(n)).collect::<Result<Vec<_>>>()?;
    if let Some(missing) = cube.active_dimensions().into_iter().find(|d| !seen.contains(d)) {
        return Err(CubeError::Axis(format!(
            "dimension '{}' is on neither axis",
            cube.schema().dimension(missing).name()
        )));
    }
    Ok((row_axes, col_axes))
}

/// Lays `cube` out with `rows` and `cols`, which must partition its retained
/// dimensions.
pub fn to_view(cube: Arc<Cube>, rows: &[&str], cols: &[&str]) -> Result<CubeView> {
    let (row_axes, col_axes) = resolve_axes(&cube, rows, cols)?;
    CubeView::materialize(cube, row_axes, col_axes)
}

/// Re-arranges a view. The new axes must be a permutation of the old ones;
/// the underlying cube is shared.
pub fn pivot(view: &CubeView, rows: &[&str], cols: &[&str]) -> Result<CubeView> {
    let (row_axes, col_axes) = resolve_axes(&view.cube, rows, cols)?;
    let old: BTreeSet<usize> = view.row_axes.iter().chain(&view.col_axes).copied().collect();
    let new: BTreeSet<usize> = row_axes.iter().chain(&col_axes).copied().collect();
    if old != new {
        return Err(CubeError::Axis("pivot axes must permute the view's axes".into()));
    }
    CubeView::materialize(view.cube.clone(), row_axes, col_axes)
}

impl CubeView {
    pub(crate) fn materialize(
        cube: Arc<Cube>,
        row_axes: Vec<usize>,
        col_axes: Vec<usize>,
    ) -> Result<Self> {
        let row_pos: Vec<usize> = row_axes
            .iter()
            .map(|&d| cube.coordinate_position(d).expect("active"))
            .collect();
        let col_pos: Vec<usize> = col_axes
            .iter()
            .map(|&d| cube.coordinate_position(d).expect("active"))
            .collect();
        let project = |coord: &Coord, pos: &[usize]| -> Coord { pos.iter().map(|&p| coord[p]).collect() };

        let mut rows = BTreeSet::new();
        let mut cols = BTreeSet::new();
        for coord in cube.cells().keys() {
            rows.insert(project(coord, &row_pos));
            cols.insert(project(coord, &col_pos));
        }
        let size = rows.len().saturating_mul(cols.len());
        if size > MAX_GRID_CELLS {
            return Err(CubeError::Axis(format!(
                "view would materialize {} x {} cells (limit {MAX_GRID_CELLS})",
                rows.len(),
                cols.len()
            )));
        }
        let row_headers: Vec<Coord> = rows.into_iter().collect();
        let col_headers: Vec<Coord> = cols.into_iter().collect();
        let row_index: BTreeMap<&Coord, usize> =
            row_headers.iter().enumerate().map(|(i, h)| (h, i)).collect();
        let col_index: BTreeMap<&Coord, usize> =
            col_headers.iter().enumerate().map(|(i, h)| (h, i)).collect();

        let mut grid = vec![None; size];
        for (coord, states) in cube.cells() {
            let r = row_index[&project(coord, &row_pos)];
            let c = col_index[&project(coord, &col_pos)];
            grid[r * col_headers.len() + c] = Some(finalize(states));
        }
        Ok(Self {
            cube,
            row_axes,
            col_axes,
            row_headers,
            col_headers,
            grid,
        })
    }

    pub fn cube(&self) -> &Arc<Cube> {
        &self.cube
    }

    pub fn row_axes(&self) -> &[usize] {
        &self.row_axes
    }

    pub fn col_axes(&self) -> &[usize] {
        &self.col_axes
    }

    pub fn axis_names(&self, axes: &[usize]) -> Vec<String> {
        axes.iter()
            .map(|&d| self.cube.schema().dimension(d).name().to_owned())
            .collect()
    }

    pub fn row_headers(&self) -> &[Coord] {
        &self.row_headers
    }

    pub fn col_headers(&self) -> &[Coord] {
        &self.col_headers
    }

    pub fn n_rows(&self) -> usize {
        self.row_headers.len()
    }

    pub fn n_cols(&self) -> usize {
        self.col_headers.len()
    }

    pub fn value(&self, row: usize, col: usize) -> Option<&[Value]> {
        self.grid[row * self.col_headers.len() + col].as_deref()
    }

    /// Header member names for an axis header tuple.
    pub fn header_names(&self, axes: &[usize], header: &[u32]) -> Vec<String> {
        axes.iter()
            .zip(header)
            .map(|(&d, &m)| {
                let level = self.cube.levels()[d].expect("active");
                self.cube.schema().dimension(d).level(level).members()[m as usize].clone()
            })
            .collect()
    }

    /// Non-empty values of one measure, in grid order.
    pub fn values(&self, measure: usize) -> Vec<Value> {
        self.grid.iter().flatten().map(|v| v[measure]).collect()
    }

    /// Rebuilds the coordinate -> values mapping the grid encodes.
    pub fn to_cell_map(&self) -> BTreeMap<Coord, Vec<Value>> {
        let width = self.cube.active_dimensions().len();
        let mut out = BTreeMap::new();
        for (r, rh) in self.row_headers.iter().enumerate() {
            for (c, ch) in self.col_headers.iter().enumerate() {
                if let Some(v) = self.value(r, c) {
                    let mut coord = vec![0; width];
                    for (&d, &m) in self.row_axes.iter().zip(rh) {
                        coord[self.cube.coordinate_position(d).expect("active")] = m;
                    }
                    for (&d, &m) in self.col_axes.iter().zip(ch) {
                        coord[self.cube.coordinate_position(d).expect("active")] = m;
                    }
                    out.insert(coord, v.to_vec());
                }
            }
        }
        out
    }
}

/// Same arrangement and grid.
impl PartialEq for CubeView {
    fn eq(&self, other: &Self) -> bool {
        self.row_axes == other.row_axes
            && self.col_axes == other.col_axes
            && self.row_headers == other.row_headers
            && self.col_headers == other.col_headers
            && self.grid == other.grid
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::{build_cube, AggSpec};
    use crate::fixtures::{f6_facts, f6_schema};
    use crate::ops::roll_up;

    fn base() -> Arc<Cube> {
        Arc::new(build_cube(f6_facts(), &AggSpec::defaults(&f6_schema())).unwrap())
    }

    fn sorted_ints(mut v: Vec<Value>) -> Vec<i64> {
        v.sort_by(|a, b| a.as_f64().total_cmp(&b.as_f64()));
        v.into_iter().map(|v| v.as_f64() as i64).collect()
    }

    #[test]
    fn f6_base_view() {
        let view = to_view(base(), &["geo", "product"], &["quarter"]).unwrap();
        assert_eq!(view.n_cols(), 2);
        assert_eq!(view.n_rows(), 6);
        assert_eq!(view.values(0).len(), 6);
        assert_eq!(view.header_names(view.col_axes(), &view.col_headers()[1]), vec!["Q2"]);
        assert_eq!(view.value(0, 0), Some(&[Value::Int(10)][..]));
        assert_eq!(view.value(0, 1), None);
    }

    #[test]
    fn rolled_to_all_is_one_by_one() {
        let mut c = (*base()).clone();
        for d in ["geo", "product", "quarter"] {
            c = roll_up(&c, d, "ALL").unwrap();
        }
        let view = to_view(Arc::new(c), &[], &[]).unwrap();
        assert_eq!((view.n_rows(), view.n_cols()), (1, 1));
        assert_eq!(view.value(0, 0), Some(&[Value::Int(210)][..]));
    }

    #[test]
    fn axis_errors() {
        let b = base();
        assert_eq!(to_view(b.clone(), &["geo"], &["geo"]).unwrap_err().code(), "axis");
        assert_eq!(to_view(b.clone(), &["geo"], &["quarter"]).unwrap_err().code(), "axis");
        assert_eq!(to_view(b, &["geo", "product", "quarter", "color"], &[]).unwrap_err().code(), "axis");
    }

    #[test]
    fn pivot_keeps_values_and_inverts() {
        let view = to_view(base(), &["geo", "product"], &["quarter"]).unwrap();
        let p = pivot(&view, &["quarter"], &["geo", "product"]).unwrap();
        assert!(Arc::ptr_eq(view.cube(), p.cube()));
        assert_eq!(sorted_ints(p.values(0)), vec![10, 20, 30, 40, 50, 60]);
        assert_eq!(p.to_cell_map(), view.to_cell_map());
        assert_eq!(pivot(&p, &["geo", "product"], &["quarter"]).unwrap(), view);
        assert_eq!(pivot(&view, &["geo", "product"], &["quarter"]).unwrap(), view);
    }

    #[test]
    fn pivot_must_permute() {
        let view = to_view(base(), &["geo", "product"], &["quarter"]).unwrap();
        assert_eq!(pivot(&view, &["geo"], &["quarter"]).unwrap_err().code(), "axis");
    }
}
