//! Cube cells against a brute-force nested-loop group-by.

use std::sync::Arc;

use cube_core::{
    build_cube_with, load_facts, AggFn, AggSpec, CubeSchema, FactTable, ParallelConfig, Value,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

const CARDS: [usize; 3] = [4, 3, 2];

fn dataset(rows: usize, seed: u64) -> (Arc<FactTable>, Vec<[usize; 3]>, Vec<Vec<i64>>) {
    let dims: Vec<_> = CARDS
        .iter()
        .enumerate()
        .map(|(d, &n)| {
            let members: Vec<String> = (0..n).map(|i| format!("m{d}_{i}")).collect();
            json!({"name": format!("d{d}"), "levels": ["base"], "members": {"base": members}})
        })
        .collect();
    let measures: Vec<_> = AggFn::ALL
        .iter()
        .map(|f| json!({"name": f.as_str(), "kind": "integer", "aggregate": f.as_str()}))
        .collect();
    let schema = json!({"dimensions": dims, "measures": measures}).to_string();
    let schema = Arc::new(CubeSchema::from_json(schema.as_bytes()).unwrap());

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keys = Vec::new();
    let mut values = vec![Vec::new(); AggFn::ALL.len()];
    let mut csv = String::from("d0,d1,d2");
    for f in AggFn::ALL {
        csv.push(',');
        csv.push_str(f.as_str());
    }
    csv.push('\n');
    for _ in 0..rows {
        let k = [0, 1, 2].map(|d| rng.gen_range(0..CARDS[d]));
        csv.push_str(&format!("m0_{},m1_{},m2_{}", k[0], k[1], k[2]));
        for col in values.iter_mut() {
            let v: i64 = rng.gen_range(-1_000_000..1_000_000);
            col.push(v);
            csv.push_str(&format!(",{v}"));
        }
        csv.push('\n');
        keys.push(k);
    }
    let mut facts = load_facts(csv.as_bytes(), schema).unwrap();
    assert!(facts.validate().ok);
    (Arc::new(facts), keys, values)
}

fn oracle(f: AggFn, xs: &[i64]) -> Value {
    match f {
        AggFn::Sum => Value::Int(xs.iter().sum()),
        AggFn::Count => Value::Int(xs.len() as i64),
        AggFn::Min => Value::Int(*xs.iter().min().unwrap()),
        AggFn::Max => Value::Int(*xs.iter().max().unwrap()),
        AggFn::Mean => Value::Real(xs.iter().sum::<i64>() as f64 / xs.len() as f64),
    }
}

fn close(a: Value, b: Value) -> bool {
    match (a, b) {
        (Value::Int(x), Value::Int(y)) => x == y,
        (Value::Real(x), Value::Real(y)) => (x - y).abs() <= 1e-9 * y.abs().max(1.0),
        _ => false,
    }
}

#[test]
fn thousand_rows_all_functions_chunk_64() {
    let (facts, keys, values) = dataset(1000, 7);
    let agg = AggSpec::defaults(facts.schema());
    let cfg = ParallelConfig::default().with_workers(4).with_chunk_size(64);
    let cube = build_cube_with(facts, &agg, cfg).unwrap();
    assert_eq!(cube.exec_stats().partitions, 16);

    let mut occupied = 0;
    for a in 0..CARDS[0] {
        for b in 0..CARDS[1] {
            for c in 0..CARDS[2] {
                let rows: Vec<usize> = (0..keys.len()).filter(|&r| keys[r] == [a, b, c]).collect();
                let names = [format!("m0_{a}"), format!("m1_{b}"), format!("m2_{c}")];
                let names: Vec<&str> = names.iter().map(String::as_str).collect();
                let cell = cube.cell(&names).unwrap();
                if rows.is_empty() {
                    assert!(cell.is_none(), "cell {names:?} should be empty");
                    continue;
                }
                occupied += 1;
                let cell = cell.unwrap();
                for (m, f) in AggFn::ALL.iter().enumerate() {
                    let xs: Vec<i64> = rows.iter().map(|&r| values[m][r]).collect();
                    assert!(close(cell[m], oracle(*f, &xs)), "{f:?} at {names:?}");
                }
            }
        }
    }
    assert_eq!(cube.len(), occupied);
}

#[test]
fn partitioning_does_not_change_cells() {
    let (facts, _, _) = dataset(2500, 11);
    let agg = AggSpec::defaults(facts.schema());
    let reference = build_cube_with(facts.clone(), &agg, ParallelConfig::sequential()).unwrap();
    for chunk in [1, 7, 64, 1000, 5000] {
        for workers in [1, 2, 8] {
            let cfg = ParallelConfig::default().with_workers(workers).with_chunk_size(chunk);
            let cube = build_cube_with(facts.clone(), &agg, cfg).unwrap();
            assert!(cube == reference, "chunk {chunk} workers {workers}");
        }
    }
}
