mod common;

use reducedkey::bbn::{Model, TrainOptions};
use reducedkey::compile::compile_table;
use reducedkey::corpus::{extract_samples, normalize};
use reducedkey::keypad::{GREEK_CAPS, LATIN_CAPS};
use reducedkey::{builtin_layout, ReorderingTable};
use serde_json::Value;

fn schema() -> jsonschema::JSONSchema {
    let text = std::fs::read_to_string(common::docs_dir().join("table.schema.json")).unwrap();
    let value: Value = serde_json::from_str(&text).unwrap();
    jsonschema::JSONSchema::compile(&value).unwrap()
}

fn compiled_greek() -> (ReorderingTable, reducedkey::KeypadLayout) {
    let layout = builtin_layout(GREEK_CAPS).unwrap();
    let text = std::fs::read_to_string(common::data_dir().join("greek-sample-corpus.txt")).unwrap();
    let samples = extract_samples(&normalize(&text, layout.alphabet()), &layout, 3).unwrap();
    let (model, _) = Model::train(&samples, &layout, 3, &TrainOptions::default()).unwrap();
    let (table, _) = compile_table(&model, &layout, 3).unwrap();
    (table, layout)
}

#[test]
fn greek_export_validates() {
    let (table, layout) = compiled_greek();
    let json: Value = serde_json::from_str(&table.export_json(&layout).unwrap()).unwrap();
    let schema = schema();
    if let Err(errors) = schema.validate(&json) {
        let messages: Vec<String> = errors.map(|e| e.to_string()).collect();
        panic!("{messages:?}");
    }
    assert_eq!(json["rows"].as_object().unwrap().len(), 15625);
    assert_eq!(json["keypad"]["7"], serde_json::json!(["Π", "Ρ", "Σ"]));
}

#[test]
fn latin_export_validates() {
    let layout = builtin_layout(LATIN_CAPS).unwrap();
    let table = ReorderingTable::from_rows(layout.alphabet(), 2, vec![[0; 8]; 27 * 27]).unwrap();
    let json: Value = serde_json::from_str(&table.export_json(&layout).unwrap()).unwrap();
    assert!(schema().is_valid(&json));
    assert_eq!(json["keypad"]["9"], serde_json::json!(["W", "X", "Y", "Z"]));
}

#[test]
fn schema_rejects_bad_codes_and_extra_fields() {
    let layout = builtin_layout(GREEK_CAPS).unwrap();
    let table = ReorderingTable::from_rows(layout.alphabet(), 1, vec![[0; 8]; 25]).unwrap();
    let good: Value = serde_json::from_str(&table.export_json(&layout).unwrap()).unwrap();
    let schema = schema();
    assert!(schema.is_valid(&good));

    let mut zero = good.clone();
    zero["rows"]["_"][0] = Value::from(0);
    assert!(!schema.is_valid(&zero));

    let mut short = good.clone();
    short["rows"]["_"].as_array_mut().unwrap().pop();
    assert!(!schema.is_valid(&short));

    let mut extra = good;
    extra["version"] = Value::from(2);
    assert!(!schema.is_valid(&extra));
}

#[test]
fn export_import_round_trip() {
    let (table, layout) = compiled_greek();
    let (back, back_layout) = ReorderingTable::import_json(&table.export_json(&layout).unwrap()).unwrap();
    assert_eq!(back.write_binary(), table.write_binary());
    assert_eq!(back_layout.alphabet(), layout.alphabet());
}
