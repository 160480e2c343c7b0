//! Trace file format.
//!
//! ```json
//! {
//!   "agents": {
//!     "<id>": { "state_trace": [[t, s0, s1, ...], ...], "mode_trace": ["UNTRUSTED", ...] }
//!   },
//!   "unsafe": {
//!     "<id>": { "type": "ball", "state_trace": [[t, [[c0, ...], r]], ...] }
//!   }
//! }
//! ```
//!
//! Set payloads follow [`crate::geometry::payload`]. Reading reports the
//! first offending JSON path.

use serde_json::{Map, Value};
use thiserror::Error;

use super::trace::{AgentTrace, ExecutionTrace, SetSample, StateSample, TraceError, UnsafeTrace};
use crate::agents::Mode;
use crate::geometry::payload::{from_payload, to_payload};
use crate::geometry::SetKind;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{path}: {message}")]
pub struct SchemaError {
    pub path: String,
    pub message: String,
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> SchemaError {
    SchemaError {
        path: path.into(),
        message: message.into(),
    }
}

impl From<TraceError> for SchemaError {
    fn from(e: TraceError) -> Self {
        match e {
            TraceError::Invariant { path, message } => SchemaError { path, message },
            other => schema("$", other.to_string()),
        }
    }
}

pub fn trace_to_value(trace: &ExecutionTrace) -> Value {
    let agents: Map<String, Value> = trace
        .agents
        .iter()
        .map(|(id, a)| {
            let states = a
                .state_trace
                .iter()
                .map(|s| {
                    let mut row = Vec::with_capacity(s.state.len() + 1);
                    row.push(Value::from(s.t));
                    row.extend(s.state.iter().map(|&x| Value::from(x)));
                    Value::Array(row)
                })
                .collect();
            let modes = a.mode_trace.iter().map(|m| Value::from(m.as_str())).collect();
            let mut obj = Map::new();
            obj.insert("state_trace".into(), Value::Array(states));
            obj.insert("mode_trace".into(), Value::Array(modes));
            (id.clone(), Value::Object(obj))
        })
        .collect();
    let unsafe_sets: Map<String, Value> = trace
        .unsafe_sets
        .iter()
        .map(|(id, u)| {
            let states = u
                .state_trace
                .iter()
                .map(|s| Value::Array(vec![Value::from(s.t), to_payload(&s.def)]))
                .collect();
            let mut obj = Map::new();
            obj.insert("type".into(), Value::from(u.kind.as_str()));
            obj.insert("state_trace".into(), Value::Array(states));
            (id.clone(), Value::Object(obj))
        })
        .collect();
    let mut root = Map::new();
    root.insert("agents".into(), Value::Object(agents));
    root.insert("unsafe".into(), Value::Object(unsafe_sets));
    Value::Object(root)
}

/// Pretty-printed JSON with a trailing newline.
pub fn trace_to_string(trace: &ExecutionTrace) -> String {
    let mut s = serde_json::to_string_pretty(&trace_to_value(trace)).expect("trace serializes");
    s.push('\n');
    s
}

fn object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>, SchemaError> {
    v.as_object().ok_or_else(|| schema(path, "expected an object"))
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value, SchemaError> {
    obj.get(key)
        .ok_or_else(|| schema(path, format!("missing key {key:?}")))
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>, SchemaError> {
    v.as_array().ok_or_else(|| schema(path, "expected an array"))
}

fn parse_agent(v: &Value, path: &str) -> Result<AgentTrace, SchemaError> {
    let obj = object(v, path)?;
    let st_path = format!("{path}.state_trace");
    let mut state_trace = Vec::new();
    for (k, row) in array(field(obj, "state_trace", path)?, &st_path)?.iter().enumerate() {
        let row_path = format!("{st_path}[{k}]");
        let row = array(row, &row_path)?;
        let nums: Option<Vec<f64>> = row.iter().map(Value::as_f64).collect();
        match nums.as_deref() {
            Some([t, state @ ..]) if !state.is_empty() => state_trace.push(StateSample {
                t: *t,
                state: state.to_vec(),
            }),
            Some(_) => return Err(schema(row_path, "expected [t, s0, s1, ...]")),
            None => return Err(schema(row_path, "entries must be numbers")),
        }
    }
    let mt_path = format!("{path}.mode_trace");
    let mode_trace = array(field(obj, "mode_trace", path)?, &mt_path)?
        .iter()
        .enumerate()
        .map(|(k, m)| {
            m.as_str()
                .and_then(|s| s.parse::<Mode>().ok())
                .ok_or_else(|| schema(format!("{mt_path}[{k}]"), "expected SAFETY, UNTRUSTED or NORMAL"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(AgentTrace {
        state_trace,
        mode_trace,
    })
}

fn parse_unsafe(v: &Value, path: &str) -> Result<UnsafeTrace, SchemaError> {
    let obj = object(v, path)?;
    let type_path = format!("{path}.type");
    let kind = field(obj, "type", path)?
        .as_str()
        .and_then(SetKind::parse)
        .ok_or_else(|| schema(&type_path, "expected point, ball, hyperrectangle or polytope"))?;
    let st_path = format!("{path}.state_trace");
    let mut state_trace = Vec::new();
    for (k, row) in array(field(obj, "state_trace", path)?, &st_path)?.iter().enumerate() {
        let row_path = format!("{st_path}[{k}]");
        match array(row, &row_path)?.as_slice() {
            [t, payload] => {
                let t = t
                    .as_f64()
                    .ok_or_else(|| schema(format!("{row_path}[0]"), "expected a timestamp"))?;
                let def = from_payload(kind, payload)
                    .map_err(|e| schema(format!("{row_path}[1]"), e.to_string()))?;
                state_trace.push(SetSample { t, def });
            }
            _ => return Err(schema(row_path, "expected [t, definition]")),
        }
    }
    Ok(UnsafeTrace { kind, state_trace })
}

pub fn trace_from_value(v: &Value) -> Result<ExecutionTrace, SchemaError> {
    let root = object(v, "$")?;
    let mut trace = ExecutionTrace::default();
    for (id, a) in object(field(root, "agents", "$")?, "agents")? {
        let agent = parse_agent(a, &format!("agents.{id}"))?;
        trace.agents.insert(id.clone(), agent);
    }
    if let Some(u) = root.get("unsafe") {
        for (id, s) in object(u, "unsafe")? {
            let set = parse_unsafe(s, &format!("unsafe.{id}"))?;
            trace.unsafe_sets.insert(id.clone(), set);
        }
    }
    if trace.agents.is_empty() {
        return Err(schema("agents", "at least one agent is required"));
    }
    if let Some(id) = trace.agents.keys().find(|id| trace.unsafe_sets.contains_key(*id)) {
        return Err(schema(format!("unsafe.{id}"), "id is also used by an agent"));
    }
    trace.validate()?;
    Ok(trace)
}

pub fn trace_from_str(s: &str) -> Result<ExecutionTrace, SchemaError> {
    let mut de = serde_json::Deserializer::from_str(s);
    let v: Value = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { "$".to_string() } else { path };
        schema(path, e.into_inner().to_string())
    })?;
    de.end().map_err(|e| schema("$", e.to_string()))?;
    trace_from_value(&v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn sample() -> Value {
        json!({
            "agents": {
                "follower": {"state_trace": [[0.0, 0.0, 1.0], [0.1, 0.1, 1.0]], "mode_trace": ["UNTRUSTED"]},
                "leader": {"state_trace": [[0.0, 5.0, 1.0], [0.1, 5.1, 1.0]], "mode_trace": ["NORMAL"]}
            },
            "unsafe": {
                "unsafe1": {"type": "ball", "state_trace": [[0.0, [[10.0], 7.0]], [0.1, [[10.1], 7.0]]]}
            }
        })
    }

    #[test]
    fn parse_and_reemit() {
        let v = sample();
        let tr = trace_from_value(&v).unwrap();
        assert_eq!(tr.len(), 2);
        assert_eq!(tr.agents.keys().collect::<Vec<_>>(), ["follower", "leader"]);
        assert_eq!(trace_to_value(&tr), v);
    }

    #[test]
    fn errors_name_the_path() {
        let mut v = sample();
        v["agents"]["follower"]["state_trace"] = json!("oops");
        let e = trace_from_value(&v).unwrap_err();
        assert_eq!(e.path, "agents.follower.state_trace");

        let mut v = sample();
        v["agents"]["leader"]["state_trace"][1] = json!([0.1]);
        assert_eq!(trace_from_value(&v).unwrap_err().path, "agents.leader.state_trace[1]");

        let mut v = sample();
        v["unsafe"]["unsafe1"]["state_trace"][0][1] = json!([[10.0], -7.0]);
        assert_eq!(trace_from_value(&v).unwrap_err().path, "unsafe.unsafe1.state_trace[0][1]");

        let mut v = sample();
        v["agents"]["leader"]["mode_trace"] = json!([]);
        assert_eq!(trace_from_value(&v).unwrap_err().path, "agents.leader.mode_trace");

        let mut v = sample();
        v["agents"]["leader"]["state_trace"][1][0] = json!(0.2);
        assert_eq!(trace_from_value(&v).unwrap_err().path, "agents.leader.state_trace");

        assert_eq!(trace_from_str("").unwrap_err().path, "$");
        let text = serde_json::to_string(&sample()).unwrap();
        let cut = &text[..text.find("[0.1,0.1").unwrap() + 4];
        let e = trace_from_str(cut).unwrap_err();
        assert!(e.path.starts_with("agents.follower.state_trace"), "{}", e.path);
    }
}
