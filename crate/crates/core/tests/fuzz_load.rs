//! Whatever `load_facts` accepts, validation and cube construction must
//! answer with a value or an error, never a panic.

use std::sync::Arc;

use cube_core::{build_cube, fixtures, load_facts, AggSpec};
use proptest::prelude::*;

fn token() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("NYC".to_string()),
        Just("SFO".to_string()),
        Just("BER".to_string()),
        Just("LAX".to_string()),
        Just("A".to_string()),
        Just("B".to_string()),
        Just("Q1".to_string()),
        Just("Q2".to_string()),
        Just("".to_string()),
        Just("\"x,y\"".to_string()),
        any::<i64>().prop_map(|v| v.to_string()),
        "[ -~]{0,6}",
    ]
}

fn csv_text() -> impl Strategy<Value = String> {
    let header = prop_oneof![
        Just("geo,product,quarter,sales".to_string()),
        Just("sales,quarter,geo,product".to_string()),
        Just("geo,product,sales".to_string()),
        "[a-z,]{0,20}",
    ];
    let rows = prop::collection::vec(prop::collection::vec(token(), 0..6), 0..12);
    (header, rows).prop_map(|(h, rows)| {
        let mut s = h;
        for r in rows {
            s.push('\n');
            s.push_str(&r.join(","));
        }
        s
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn validate_then_build_never_panics(text in csv_text()) {
        let schema = fixtures::f6_schema();
        if let Ok(mut facts) = load_facts(text.as_bytes(), schema.clone()) {
            let report = facts.validate();
            let built = build_cube(Arc::new(facts), &AggSpec::defaults(&schema));
            prop_assert_eq!(report.ok, built.is_ok());
        }
    }

    #[test]
    fn arbitrary_bytes_never_panic(bytes in prop::collection::vec(any::<u8>(), 0..256)) {
        let schema = fixtures::f6_schema();
        if let Ok(mut facts) = load_facts(&bytes, schema.clone()) {
            facts.validate();
            let _ = build_cube(Arc::new(facts), &AggSpec::defaults(&schema));
        }
    }
}
