//! Scenario files.
//!
//! ```json
//! {
//!   "workspace_dim": 1,
//!   "time": {"dt": 0.1, "T": 5.0},
//!   "agents": [
//!     {"id": "follower", "model": "acc", "init": [0, 1], "mode": "UNTRUSTED",
//!      "goal": {"follow": {"agent": "leader"}},
//!      "rta": {"type": "sim", "horizon": 1.0}},
//!     {"id": "leader", "model": "acc", "init": [5, 1], "mode": "NORMAL"}
//!   ],
//!   "unsafe_sets": [
//!     {"id": "unsafe1", "type": "ball", "definition": [[0], 7], "anchor": "leader", "offset": [5]}
//!   ]
//! }
//! ```

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value;
use thiserror::Error;

use crate::agents::{
    AccAgent, AccParams, AgentError, DubinsCarAgent, DubinsCarParams, DubinsPlaneAgent,
    DubinsPlaneParams, Goal, Mode, ModelKind, Waypoint,
};
use crate::geometry::payload::{from_payload, PayloadError};
use crate::geometry::{RelativeSetSpec, SetKind};
use crate::rta::{BloatSchedule, ReachRta, RtaBinding, RtaError, SimRta, DEFAULT_BLOAT_RATE, DEFAULT_PREDICTION_HORIZON};
use crate::scenario::{AgentConfig, ScenarioConfig, UnsafeSpec};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{path}: unknown model {name:?} (expected acc, dubins_car or dubins_plane)")]
    UnknownModel { path: String, name: String },
    #[error("{path}: unknown set type {name:?} (expected point, ball, hyperrectangle or polytope)")]
    UnknownSetType { path: String, name: String },
    #[error("agent {id:?}: {source}")]
    Agent {
        id: String,
        #[source]
        source: AgentError,
    },
    #[error("unsafe set {id:?}: {source}")]
    Set {
        id: String,
        #[source]
        source: PayloadError,
    },
    #[error("agent {id:?} rta: {message}")]
    Rta { id: String, message: String },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub workspace_dim: usize,
    pub time: TimeSection,
    pub agents: Vec<AgentEntry>,
    #[serde(default)]
    pub unsafe_sets: Vec<UnsafeEntry>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub dt: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
}

fn normal() -> Mode {
    Mode::Normal
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentEntry {
    pub id: String,
    pub model: String,
    #[serde(default)]
    pub params: Value,
    #[serde(default)]
    pub goal: Option<GoalEntry>,
    pub init: Vec<f64>,
    #[serde(default = "normal")]
    pub mode: Mode,
    #[serde(default)]
    pub rta: Option<RtaEntry>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FollowEntry {
    pub agent: String,
    /// Defaults to `[-d]` for ACC agents and no offset otherwise.
    #[serde(default)]
    pub offset: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaypointEntry {
    pub t: f64,
    pub point: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum GoalEntry {
    Fixed(Vec<f64>),
    Follow(FollowEntry),
    Path(Vec<WaypointEntry>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RtaKind {
    Sim,
    Reach,
    None,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RtaEntry {
    #[serde(rename = "type")]
    pub kind: RtaKind,
    #[serde(default)]
    pub horizon: Option<f64>,
    #[serde(default)]
    pub bloat_rate: Option<f64>,
    #[serde(default)]
    pub guards: Option<Vec<String>>,
    /// Collect timing and trace data for evaluation.
    #[serde(default = "yes")]
    pub eval: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnsafeEntry {
    pub id: String,
    #[serde(rename = "type")]
    pub kind: String,
    pub definition: Value,
    #[serde(default)]
    pub anchor: Option<String>,
    #[serde(default)]
    pub offset: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct AccParamsEntry {
    k1: Option<f64>,
    k2: Option<f64>,
    a_max: Option<f64>,
    v_max: Option<f64>,
    d: Option<f64>,
    c: Option<f64>,
    v_bar: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CarParamsEntry {
    k_theta: Option<f64>,
    k_v: Option<f64>,
    a_max: Option<f64>,
    omega_max: Option<f64>,
    v_max: Option<f64>,
    v_safe: Option<f64>,
    v_cruise: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlaneParamsEntry {
    k_theta: Option<f64>,
    k_v: Option<f64>,
    a_max: Option<f64>,
    omega_max: Option<f64>,
    v_max: Option<f64>,
    v_safe: Option<f64>,
    v_cruise: Option<f64>,
    k_gamma: Option<f64>,
    gamma_max: Option<f64>,
    pitch_up: Option<f64>,
}

fn set(slot: &mut f64, v: Option<f64>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn deserialize_at<T: DeserializeOwned>(v: &Value, prefix: &str) -> Result<T, ConfigError> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        let inner = e.path().to_string();
        let path = if inner == "." { prefix.to_string() } else { format!("{prefix}.{inner}") };
        ConfigError::Parse {
            path,
            message: e.into_inner().to_string(),
        }
    })
}

fn params_at<T: DeserializeOwned + Default>(v: &Value, prefix: &str) -> Result<T, ConfigError> {
    if v.is_null() {
        Ok(T::default())
    } else {
        deserialize_at(v, prefix)
    }
}

fn goal_of(entry: Option<&GoalEntry>, acc_d: Option<f64>) -> Goal {
    match entry {
        None => Goal::None,
        Some(GoalEntry::Fixed(g)) => Goal::Fixed(g.clone()),
        Some(GoalEntry::Follow(f)) => Goal::Follow {
            agent: f.agent.clone(),
            offset: f
                .offset
                .clone()
                .unwrap_or_else(|| acc_d.map(|d| vec![-d]).unwrap_or_default()),
        },
        Some(GoalEntry::Path(w)) => Goal::Path(
            w.iter()
                .map(|w| Waypoint {
                    t: w.t,
                    point: w.point.clone(),
                })
                .collect(),
        ),
    }
}

fn agent_config(a: &AgentEntry, path: &str, file: &ScenarioFile) -> Result<AgentConfig, ConfigError> {
    let kind = ModelKind::parse(&a.model).ok_or_else(|| ConfigError::UnknownModel {
        path: format!("{path}.model"),
        name: a.model.clone(),
    })?;
    let agent_err = |source| ConfigError::Agent {
        id: a.id.clone(),
        source,
    };
    let params_path = format!("{path}.params");
    let mut config = match kind {
        ModelKind::Acc => {
            let e: AccParamsEntry = params_at(&a.params, &params_path)?;
            let mut p = AccParams::default();
            set(&mut p.k1, e.k1);
            set(&mut p.k2, e.k2);
            set(&mut p.a_max, e.a_max);
            set(&mut p.v_max, e.v_max);
            set(&mut p.d, e.d);
            set(&mut p.c, e.c);
            set(&mut p.v_bar, e.v_bar);
            let goal = goal_of(a.goal.as_ref(), Some(p.d));
            let agent = AccAgent::new(a.id.clone(), p).map_err(agent_err)?.with_goal(goal);
            AgentConfig::new(agent, a.init.clone(), a.mode)
        }
        ModelKind::DubinsCar => {
            let e: CarParamsEntry = params_at(&a.params, &params_path)?;
            let mut p = DubinsCarParams::default();
            set(&mut p.k_theta, e.k_theta);
            set(&mut p.k_v, e.k_v);
            set(&mut p.a_max, e.a_max);
            set(&mut p.omega_max, e.omega_max);
            set(&mut p.v_max, e.v_max);
            set(&mut p.v_safe, e.v_safe);
            p.v_cruise = e.v_cruise.or(p.v_cruise);
            let agent = DubinsCarAgent::new(a.id.clone(), p, goal_of(a.goal.as_ref(), None)).map_err(agent_err)?;
            AgentConfig::new(agent, a.init.clone(), a.mode)
        }
        ModelKind::DubinsPlane => {
            let e: PlaneParamsEntry = params_at(&a.params, &params_path)?;
            let mut p = DubinsPlaneParams::default();
            set(&mut p.car.k_theta, e.k_theta);
            set(&mut p.car.k_v, e.k_v);
            set(&mut p.car.a_max, e.a_max);
            set(&mut p.car.omega_max, e.omega_max);
            set(&mut p.car.v_max, e.v_max);
            set(&mut p.car.v_safe, e.v_safe);
            p.car.v_cruise = e.v_cruise.or(p.car.v_cruise);
            set(&mut p.k_gamma, e.k_gamma);
            set(&mut p.gamma_max, e.gamma_max);
            set(&mut p.pitch_up, e.pitch_up);
            let agent = DubinsPlaneAgent::new(a.id.clone(), p, goal_of(a.goal.as_ref(), None)).map_err(agent_err)?;
            AgentConfig::new(agent, a.init.clone(), a.mode)
        }
    };
    if let Some(r) = &a.rta {
        if let Some(b) = rta_binding(r, &a.id, file)? {
            config = config.with_rta(b);
        }
    }
    Ok(config)
}

fn rta_binding(r: &RtaEntry, id: &str, file: &ScenarioFile) -> Result<Option<RtaBinding>, ConfigError> {
    let rta_err = |message: String| ConfigError::Rta {
        id: id.to_string(),
        message,
    };
    let horizon = r.horizon.unwrap_or(DEFAULT_PREDICTION_HORIZON);
    if r.kind != RtaKind::None && !(horizon >= file.time.dt) {
        return Err(rta_err(format!(
            "horizon {horizon} must be at least the time step {}",
            file.time.dt
        )));
    }
    if r.kind != RtaKind::Reach && r.bloat_rate.is_some() {
        return Err(rta_err("bloat_rate only applies to type \"reach\"".into()));
    }
    if let Some(g) = r.guards.iter().flatten().find(|g| !file.unsafe_sets.iter().any(|s| &s.id == *g)) {
        return Err(rta_err(format!("guards unknown unsafe set {g:?}")));
    }
    let binding = match r.kind {
        RtaKind::None => return Ok(None),
        RtaKind::Sim => {
            let mut logic = SimRta::new(id).with_horizon(horizon);
            logic.guards = r.guards.clone();
            RtaBinding::new(logic)
        }
        RtaKind::Reach => {
            let bloat = BloatSchedule::Linear {
                rate: r.bloat_rate.unwrap_or(DEFAULT_BLOAT_RATE),
            };
            let mut logic = ReachRta::new(id, bloat)
                .map_err(|e: RtaError| rta_err(e.to_string()))?
                .with_horizon(horizon);
            logic.guards = r.guards.clone();
            RtaBinding::new(logic)
        }
    };
    let mut binding = binding;
    if r.eval {
        binding.setup_eval();
    }
    Ok(Some(binding))
}

fn unsafe_spec(u: &UnsafeEntry, path: &str) -> Result<UnsafeSpec, ConfigError> {
    let kind = SetKind::parse(&u.kind).ok_or_else(|| ConfigError::UnknownSetType {
        path: format!("{path}.type"),
        name: u.kind.clone(),
    })?;
    let set_err = |source| ConfigError::Set {
        id: u.id.clone(),
        source,
    };
    let def = from_payload::<f64>(kind, &u.definition).map_err(set_err)?;
    match (&u.anchor, &u.offset) {
        (None, None) => Ok(UnsafeSpec::Static { id: u.id.clone(), def }),
        (Some(anchor), offset) => {
            let offset = offset.clone().unwrap_or_else(|| vec![0.0; def.dim()]);
            RelativeSetSpec::new(u.id.clone(), def, offset, anchor.clone())
                .map(UnsafeSpec::Relative)
                .map_err(|e| set_err(PayloadError::Invalid(e)))
        }
        (None, Some(_)) => Err(ConfigError::Parse {
            path: format!("{path}.offset"),
            message: "an offset needs an anchor".into(),
        }),
    }
}

/// Maps a parsed file onto a scenario configuration, applying defaults.
pub fn config_from_file(file: &ScenarioFile) -> Result<ScenarioConfig, ConfigError> {
    let agents = file
        .agents
        .iter()
        .enumerate()
        .map(|(i, a)| agent_config(a, &format!("agents[{i}]"), file))
        .collect::<Result<Vec<_>, _>>()?;
    let unsafe_sets = file
        .unsafe_sets
        .iter()
        .enumerate()
        .map(|(i, u)| unsafe_spec(u, &format!("unsafe_sets[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ScenarioConfig {
        agents,
        unsafe_sets,
        dt: file.time.dt,
        horizon: file.time.horizon,
        dim: file.workspace_dim,
    })
}

pub fn parse_scenario_file(text: &str) -> Result<ScenarioFile, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ConfigError::Parse {
            path: if path == "." { "$".into() } else { path },
            message: e.into_inner().to_string(),
        }
    })
}

pub fn parse_scenario_str(text: &str) -> Result<ScenarioConfig, ConfigError> {
    config_from_file(&parse_scenario_file(text)?)
}

pub fn parse_scenario_config(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_scenario_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::build_scenario;
    use serde_json::json;

    fn acc_file() -> Value {
        json!({
            "workspace_dim": 1,
            "time": {"dt": 0.1, "T": 5.0},
            "agents": [
                {"id": "follower", "model": "acc", "init": [0.0, 1.0], "mode": "UNTRUSTED",
                 "goal": {"follow": {"agent": "leader"}},
                 "rta": {"type": "sim", "horizon": 1.0}},
                {"id": "leader", "model": "acc", "init": [5.0, 1.0], "mode": "NORMAL"}
            ],
            "unsafe_sets": [
                {"id": "unsafe1", "type": "ball", "definition": [[0.0], 7.0], "anchor": "leader", "offset": [5.0]}
            ]
        })
    }

    fn parse(v: &Value) -> Result<ScenarioConfig, ConfigError> {
        parse_scenario_str(&v.to_string())
    }

    #[test]
    fn acc_file_maps_onto_config() {
        let c = parse(&acc_file()).unwrap();
        assert_eq!((c.dt, c.horizon, c.dim), (0.1, 5.0, 1));
        assert_eq!(c.agents.len(), 2);
        assert_eq!(c.unsafe_sets.len(), 1);
        assert!(matches!(&c.unsafe_sets[0], UnsafeSpec::Relative(r) if r.anchor == "leader"));
        assert!(c.agents[0].rta.as_ref().unwrap().collecting());
        let s = build_scenario(c).unwrap();
        assert_eq!(s.steps(), 50);
    }

    #[test]
    fn missing_time_section_is_named() {
        let mut v = acc_file();
        v.as_object_mut().unwrap().remove("time");
        let e = parse(&v).err().unwrap().to_string();
        assert!(e.contains("time"), "{e}");
    }

    #[test]
    fn unknown_model_is_named() {
        let mut v = acc_file();
        v["agents"][1]["model"] = json!("hovercraft");
        let e = parse(&v).err().unwrap();
        assert!(matches!(e, ConfigError::UnknownModel { .. }));
        assert!(e.to_string().contains("hovercraft"));
    }

    #[test]
    fn unknown_set_type_is_rejected() {
        let mut v = acc_file();
        v["unsafe_sets"][0]["type"] = json!("torus");
        assert!(matches!(parse(&v).err().unwrap(), ConfigError::UnknownSetType { .. }));
    }

    #[test]
    fn reach_default_bloat_rate() {
        let mut v = acc_file();
        v["agents"][0]["rta"] = json!({"type": "reach"});
        let c = parse(&v).unwrap();
        let logic = format!("{:?}", c.agents[0].rta.as_ref().unwrap().logic());
        assert!(logic.contains(&format!("rate: {DEFAULT_BLOAT_RATE}")), "{logic}");
    }

    #[test]
    fn bad_params_report_field_path() {
        let mut v = acc_file();
        v["agents"][0]["params"] = json!({"k1": "fast"});
        match parse(&v).err().unwrap() {
            ConfigError::Parse { path, .. } => assert_eq!(path, "agents[0].params.k1"),
            other => panic!("{other}"),
        }
        let mut v = acc_file();
        v["agents"][0]["params"] = json!({"warp": 9});
        assert!(matches!(parse(&v).err().unwrap(), ConfigError::Parse { .. }));
        let mut v = acc_file();
        v["agents"][0]["params"] = json!({"c": 20.0});
        assert!(matches!(parse(&v).err().unwrap(), ConfigError::Agent { .. }));
    }

    #[test]
    fn rta_validation() {
        let mut v = acc_file();
        v["agents"][0]["rta"] = json!({"type": "sim", "bloat_rate": 0.2});
        assert!(matches!(parse(&v).err().unwrap(), ConfigError::Rta { .. }));
        let mut v = acc_file();
        v["agents"][0]["rta"] = json!({"type": "sim", "horizon": 0.01});
        assert!(matches!(parse(&v).err().unwrap(), ConfigError::Rta { .. }));
        let mut v = acc_file();
        v["agents"][0]["rta"] = json!({"type": "sim", "guards": ["nope"]});
        assert!(matches!(parse(&v).err().unwrap(), ConfigError::Rta { .. }));
        let mut v = acc_file();
        v["agents"][0]["rta"] = json!({"type": "none"});
        assert!(parse(&v).unwrap().agents[0].rta.is_none());
    }

    #[test]
    fn syntax_errors_carry_line_and_column() {
        let e = parse_scenario_str("{\n  \"workspace_dim\": 1,\n  \"time\": {\"dt\": }\n}").err().unwrap();
        assert!(e.to_string().contains("line 3"), "{e}");
    }
}
