mod common;

use std::fs;

use serde_json::{json, Value};

use common::{data_file, scenario_file, schema_file, SCENARIOS};
use rtasim::cli::parse_scenario_str;
use rtasim::scenario::build_scenario;
use rtasim::scenario::io::{trace_from_value, trace_to_value};

fn load(path: &std::path::Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn validator(name: &str) -> jsonschema::Validator {
    jsonschema::validator_for(&load(&schema_file(name))).unwrap()
}

#[test]
fn shipped_scenarios_match_the_scenario_schema() {
    let v = validator("scenario.schema.json");
    for name in SCENARIOS {
        let cfg = load(&scenario_file(name));
        let errors: Vec<String> = v.iter_errors(&cfg).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{name}: {errors:?}");
        parse_scenario_str(&cfg.to_string()).unwrap();
    }
}

#[test]
fn scenario_schema_and_parser_reject_the_same_typos() {
    let v = validator("scenario.schema.json");
    let base = load(&scenario_file("acc_simrta.json"));
    let edits: [fn(&mut Value); 4] = [
        |c| c["agents"][0]["rta"]["type"] = json!("magic"),
        |c| c["agents"][0]["mode"] = json!("safety"),
        |c| c["time"]["dt"] = json!(-0.1),
        |c| c["agents"][0]["goal"] = json!({"fixed": [1.0], "follow": {"agent": "leader"}}),
    ];
    for (i, edit) in edits.iter().enumerate() {
        let mut cfg = base.clone();
        edit(&mut cfg);
        assert!(!v.is_valid(&cfg), "edit {i} passes the schema");
        let built = parse_scenario_str(&cfg.to_string()).map(|c| build_scenario(c).is_ok());
        assert!(!built.unwrap_or(false), "edit {i} passes the parser");
    }
}

#[test]
fn trace_schema_accepts_the_external_trace() {
    let v = validator("trace.schema.json");
    let trace = load(&data_file("external_trace.json"));
    assert!(v.is_valid(&trace));
    let parsed = trace_from_value(&trace).unwrap();
    assert_eq!(trace_to_value(&parsed), trace);
}

#[test]
fn trace_schema_enforces_payload_layouts() {
    let v = validator("trace.schema.json");
    let good = load(&data_file("external_trace.json"));
    let edits: [(&str, fn(&mut Value)); 5] = [
        ("ball radius first", |t| t["unsafe"]["rock"]["state_trace"][0][1] = json!([1.0, [5.0, 0.0]])),
        ("ball without radius", |t| t["unsafe"]["rock"]["state_trace"][0][1] = json!([[5.0, 0.0]])),
        ("unknown set type", |t| t["unsafe"]["rock"]["type"] = json!("cone")),
        ("bad mode", |t| t["agents"]["rover"]["mode_trace"][0] = json!("AUTO")),
        ("row without state", |t| t["agents"]["rover"]["state_trace"][0] = json!([0.0])),
    ];
    for (what, edit) in edits {
        let mut t = good.clone();
        edit(&mut t);
        assert!(!v.is_valid(&t), "schema accepts {what}");
        assert!(trace_from_value(&t).is_err(), "parser accepts {what}");
    }
}
