//! In-memory OLAP cubes: roll-up, drill-down, slice, dice and pivot over
//! star-schema fact tables, with exact 64-bit integer measures and
//! deterministic fork-join aggregation.
//!
//! ```
//! use cube_core::{fixtures, build_cube, roll_up, AggSpec};
//!
//! let facts = fixtures::f6_facts();
//! let cube = build_cube(facts.clone(), &AggSpec::defaults(facts.schema())).unwrap();
//! let by_country = roll_up(&cube, "geo", "country").unwrap();
//! assert_eq!(by_country.exact_total(0), Some(210));
//! ```

#![forbid(unsafe_code)]

pub mod aggregate;
pub mod cube;
pub mod error;
pub mod facts;
pub mod fixtures;
pub mod ops;
pub mod parallel;
pub mod query;
pub mod schema;
pub mod view;

pub use aggregate::{AggFn, AggState, Value};
pub use cube::{build_cube, build_cube_with, AggSpec, CellMap, Coord, Cube, Filters};
pub use error::{CubeError, Result};
pub use facts::{load_facts, FactTable, FactTableBuilder, ValidationReport};
pub use ops::{dice, drill_down, roll_up, slice, DiceFilter, RollTarget};
pub use parallel::{
    merge_partials, parallel_group_aggregate, quicksort_par, quicksort_seq, ExecStats,
    ParallelConfig, PartialAggregate, Traced,
};
pub use query::{ErrorDocument, Operation, QueryDocument, QueryState, ResultDocument};
pub use schema::{CubeSchema, DimensionSpec, MeasureKind, MeasureSpec};
pub use view::{pivot, to_view, CubeView};
