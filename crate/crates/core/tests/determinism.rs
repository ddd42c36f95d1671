use std::sync::Arc;

use cube_core::{build_cube_with, AggSpec, CubeSchema, FactTableBuilder, ParallelConfig, Value};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SCHEMA: &str = r#"{
  "dimensions": [
    {"name": "store", "levels": ["store"], "members": {"store": ["s0","s1","s2","s3","s4","s5","s6","s7"]}},
    {"name": "day", "levels": ["day"], "members": {"day": ["mon","tue","wed","thu","fri"]}}
  ],
  "measures": [
    {"name": "revenue", "kind": "real", "aggregate": "sum"},
    {"name": "avg_price", "kind": "real", "aggregate": "mean"}
  ]
}"#;

#[test]
fn real_sums_identical_across_workers_and_runs() {
    let schema = Arc::new(CubeSchema::from_json(SCHEMA.as_bytes()).unwrap());
    let stores: Vec<String> = (0..8).map(|i| format!("s{i}")).collect();
    let days = ["mon", "tue", "wed", "thu", "fri"];
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut b = FactTableBuilder::new(schema.clone());
    for _ in 0..100_000 {
        // Wide magnitude spread makes summation order visible in the low bits.
        let v = rng.gen_range(-1.0..1.0) * 10f64.powi(rng.gen_range(-6..9));
        let s = &stores[rng.gen_range(0..8)];
        let d = days[rng.gen_range(0..5)];
        b.push_row(&[s, d], &[Value::Real(v), Value::Real(v)]).unwrap();
    }
    let mut facts = b.finish().unwrap();
    assert!(facts.validate().ok);
    let facts = Arc::new(facts);
    let agg = AggSpec::defaults(&schema);

    let chunk = 4096;
    let reference = build_cube_with(
        facts.clone(),
        &agg,
        ParallelConfig::sequential().with_chunk_size(chunk),
    )
    .unwrap();
    for workers in [1, 2, 8] {
        for _ in 0..5 {
            let cfg = ParallelConfig::default().with_workers(workers).with_chunk_size(chunk);
            let cube = build_cube_with(facts.clone(), &agg, cfg).unwrap();
            assert!(cube == reference, "workers {workers}");
            for (coord, states) in cube.cells() {
                let r = &reference.cells()[coord];
                for (a, b) in states.iter().zip(r) {
                    assert_eq!(a.finalize().as_f64().to_bits(), b.finalize().as_f64().to_bits());
                }
            }
        }
    }
}
