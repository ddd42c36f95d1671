use cube_core::fixtures::{f6_csv, F6_SCHEMA_JSON};
use cube_core::query::execute;
use cube_host::{Status, WasmBridge};
use proptest::prelude::*;
use serde_json::Value;

fn bridge() -> WasmBridge {
    WasmBridge::new().expect("bridge module builds and instantiates")
}

fn open(b: &mut WasmBridge) -> u32 {
    let r = b.session_create(F6_SCHEMA_JSON.as_bytes(), f6_csv().as_bytes()).unwrap();
    assert!(r.is_ok(), "{}", r.text());
    let doc: Value = serde_json::from_slice(&r.payload).unwrap();
    doc["session"].as_u64().unwrap() as u32
}

fn code(payload: &[u8]) -> String {
    let doc: Value = serde_json::from_slice(payload).unwrap();
    doc["error"]["code"].as_str().unwrap().to_owned()
}

#[test]
fn session_lifecycle() {
    let mut b = bridge();
    assert_eq!(open(&mut b), 1);

    let q = br#"[{"op":"slice","dimension":"quarter","member":"Q1"},{"op":"view","rows":["geo","product"],"cols":[]}]"#;
    let r = b.session_query(1, q).unwrap();
    assert!(r.is_ok());
    let native = execute(F6_SCHEMA_JSON.as_bytes(), f6_csv().as_bytes(), q).unwrap();
    assert_eq!(r.payload, native);

    let bad = b.session_query(1, br#"[{"op":"slice","dimension":"color","member":"red"}]"#).unwrap();
    assert_eq!(bad.status, Status::Error);

    assert!(b.session_reset(1).unwrap().is_ok());
    let full = b.session_query(1, b"[]").unwrap();
    assert_eq!(full.payload, execute(F6_SCHEMA_JSON.as_bytes(), f6_csv().as_bytes(), b"[]").unwrap());

    assert!(b.session_free(1).unwrap().is_ok());
    let again = b.session_free(1).unwrap();
    assert_eq!(again.status, Status::Error);
    assert_eq!(code(&again.payload), "handle");
    assert_eq!(code(&b.session_query(1, b"[]").unwrap().payload), "handle");
}

#[test]
fn creation_errors_are_documents() {
    let mut b = bridge();
    let orphan = format!("{}LAX,A,Q1,5\n", f6_csv());
    let r = b.session_create(F6_SCHEMA_JSON.as_bytes(), orphan.as_bytes()).unwrap();
    assert_eq!(r.status, Status::Error);
    let doc: Value = serde_json::from_slice(&r.payload).unwrap();
    assert_eq!(doc["error"]["report"]["orphan_references"].as_array().unwrap().len(), 1);

    let no_measures = br#"{"dimensions":[{"name":"g","levels":["g"],"members":{"g":["x"]}}],"measures":[]}"#;
    assert_eq!(code(&b.session_create(no_measures, b"g\nx\n").unwrap().payload), "schema");
    assert_eq!(b.session_create(b"", b"").unwrap().status, Status::Error);
    // The failed creations consumed no handle.
    assert_eq!(open(&mut b), 1);
}

#[test]
fn memory_is_reclaimed_across_calls() {
    let mut b = bridge();
    let id = open(&mut b);
    for _ in 0..20 {
        b.session_query(id, b"[]").unwrap();
    }
    let settled = b.memory_size();
    for _ in 0..200 {
        b.session_query(id, b"[]").unwrap();
    }
    assert_eq!(b.memory_size(), settled);
}

fn op_fragment() -> impl Strategy<Value = String> {
    let word = prop_oneof![
        Just("geo"), Just("product"), Just("quarter"), Just("color"), Just("city"),
        Just("country"), Just("ALL"), Just("NYC"), Just("Q1"), Just("A"), Just(""),
    ];
    let op = prop_oneof![
        Just("rollup"), Just("drilldown"), Just("slice"), Just("dice"), Just("view"),
        Just("pivot"), Just("explode"),
    ];
    (op, word.clone(), word.clone(), word).prop_map(|(op, a, b, c)| match op {
        "rollup" | "drilldown" => format!(r#"{{"op":"{op}","dimension":"{a}","level":"{b}"}}"#),
        "slice" => format!(r#"{{"op":"slice","dimension":"{a}","member":"{b}"}}"#),
        "dice" => format!(r#"{{"op":"dice","filter":{{"{a}":["{b}","{c}"]}}}}"#),
        "view" | "pivot" => format!(r#"{{"op":"{op}","rows":["{a}"],"cols":["{b}","{c}"]}}"#),
        _ => format!(r#"{{"op":"{op}","x":"{a}"}}"#),
    })
}

fn query_bytes() -> impl Strategy<Value = Vec<u8>> {
    prop_oneof![
        prop::collection::vec(op_fragment(), 0..5).prop_map(|ops| format!("[{}]", ops.join(",")).into_bytes()),
        prop::collection::vec(any::<u8>(), 0..64),
        "[\\[\\]{}\",:a-z0-9 ]{0,40}".prop_map(String::into_bytes),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Malformed or hostile input never traps the module; every failure comes
    /// back as an error document, and results match the native engine.
    #[test]
    fn no_traps_and_native_agreement(queries in prop::collection::vec(query_bytes(), 1..6)) {
        let mut b = bridge();
        let id = open(&mut b);
        for q in &queries {
            b.session_reset(id).unwrap();
            let r = b.session_query(id, q).expect("module call does not trap");
            let doc: Value = serde_json::from_slice(&r.payload).expect("payload is JSON");
            let native = execute(F6_SCHEMA_JSON.as_bytes(), f6_csv().as_bytes(), q);
            match native {
                Ok(bytes) => prop_assert_eq!(&r.payload, &bytes),
                Err(bytes) => {
                    prop_assert_eq!(r.status, Status::Error);
                    prop_assert!(doc["error"]["code"].is_string());
                    prop_assert_eq!(&r.payload, &bytes);
                }
            }
        }
        let junk = b.session_create(&queries[0], &queries[0]).unwrap();
        prop_assert_eq!(junk.status, Status::Error);
    }
}
