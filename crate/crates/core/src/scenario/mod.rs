//! Scenario assembly and the closed-loop execution engine.
//!
//! Each tick first collects every RTA decision from the same pre-step trace,
//! then advances all agents, then re-resolves relative unsafe sets against
//! the new anchor positions. Timestamps are `k * dt`, never accumulated.

pub mod io;
mod trace;

use std::collections::HashSet;
use std::sync::Arc;

use thiserror::Error;

use crate::agents::{AgentError, AgentModel, Mode};
use crate::geometry::{update_relative, GeometryError, RelativeSetSpec, SetDef, SetKind};
use crate::rta::{RtaBinding, RtaError};

pub use trace::{
    snapshot, AgentSnapshot, AgentTrace, ExecutionTrace, SetSample, SimState, StateSample,
    TraceError, UnsafeTrace,
};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("duplicate id {0:?}")]
    DuplicateId(String),
    #[error("unsafe set {set:?} has dangling anchor {anchor:?}")]
    DanglingAnchor { set: String, anchor: String },
    #[error("time step must be positive, got {0}")]
    NonPositiveDt(f64),
    #[error("horizon must be positive and at least dt, got T = {horizon}, dt = {dt}")]
    BadHorizon { horizon: f64, dt: f64 },
    #[error("{what}: dimension {found}, workspace dimension is {expected}")]
    Dimension {
        what: String,
        expected: usize,
        found: usize,
    },
    #[error("agent {agent:?}: initial state has {found} entries, model expects {expected}")]
    InitState {
        agent: String,
        expected: usize,
        found: usize,
    },
    #[error("unsafe set {set:?}: {source}")]
    Geometry {
        set: String,
        #[source]
        source: GeometryError,
    },
    #[error("RTA bound to agent {agent:?} guards ego {ego:?}")]
    EgoMismatch { agent: String, ego: String },
    #[error("scenario has no agents")]
    NoAgents,
    #[error("agent {agent:?} failed at t = {t}: {source}")]
    Step {
        agent: String,
        t: f64,
        #[source]
        source: AgentError,
    },
    #[error("RTA for {agent:?} failed at t = {t}: {source}")]
    Rta {
        agent: String,
        t: f64,
        #[source]
        source: Box<RtaError>,
    },
    #[error("unknown agent {0:?}")]
    UnknownAgent(String),
}

/// Where an unsafe set comes from at each tick.
#[derive(Debug, Clone, PartialEq)]
pub enum UnsafeSpec {
    Static { id: String, def: SetDef<f64> },
    Relative(RelativeSetSpec<f64>),
}

impl UnsafeSpec {
    pub fn id(&self) -> &str {
        match self {
            UnsafeSpec::Static { id, .. } => id,
            UnsafeSpec::Relative(r) => &r.id,
        }
    }

    pub fn kind(&self) -> SetKind {
        match self {
            UnsafeSpec::Static { def, .. } => def.kind(),
            UnsafeSpec::Relative(r) => r.base.kind(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            UnsafeSpec::Static { def, .. } => def.dim(),
            UnsafeSpec::Relative(r) => r.base.dim(),
        }
    }

    pub fn anchor(&self) -> Option<&str> {
        match self {
            UnsafeSpec::Static { .. } => None,
            UnsafeSpec::Relative(r) => Some(&r.anchor),
        }
    }
}

pub struct AgentConfig {
    pub model: Arc<dyn AgentModel>,
    pub init: Vec<f64>,
    pub mode: Mode,
    pub rta: Option<RtaBinding>,
}

impl AgentConfig {
    pub fn new(model: impl AgentModel + 'static, init: Vec<f64>, mode: Mode) -> Self {
        AgentConfig {
            model: Arc::new(model),
            init,
            mode,
            rta: None,
        }
    }

    pub fn with_rta(mut self, rta: RtaBinding) -> Self {
        self.rta = Some(rta);
        self
    }
}

pub struct ScenarioConfig {
    pub agents: Vec<AgentConfig>,
    pub unsafe_sets: Vec<UnsafeSpec>,
    pub dt: f64,
    pub horizon: f64,
    pub dim: usize,
}

#[derive(Debug, Clone)]
pub struct WorldAgent {
    pub model: Arc<dyn AgentModel>,
    pub init: Vec<f64>,
    pub mode: Mode,
}

/// Everything about a scenario except its RTA bindings: what a switching
/// logic needs to simulate forward.
#[derive(Debug, Clone)]
pub struct World {
    pub agents: Vec<WorldAgent>,
    pub unsafe_sets: Vec<UnsafeSpec>,
    pub dt: f64,
    pub dim: usize,
}

/// Grid index of a timestamp produced as `k * dt`.
pub(crate) fn grid_index(t: f64, dt: f64) -> usize {
    (t / dt).round().max(0.0) as usize
}

impl World {
    pub fn agent(&self, id: &str) -> Option<&WorldAgent> {
        self.agents.iter().find(|a| a.model.id() == id)
    }

    pub fn agent_index(&self, id: &str) -> Option<usize> {
        self.agents.iter().position(|a| a.model.id() == id)
    }

    fn anchor_position(&self, trace: &ExecutionTrace, anchor: &str) -> Option<Vec<f64>> {
        let agent = self.agent(anchor)?;
        agent.model.kinematics().position_of(trace.last_state(anchor)?)
    }

    fn resolve_set(&self, spec: &UnsafeSpec, trace: &ExecutionTrace) -> Result<SetDef<f64>, ScenarioError> {
        match spec {
            UnsafeSpec::Static { def, .. } => Ok(def.clone()),
            UnsafeSpec::Relative(r) => {
                let pos = self
                    .anchor_position(trace, &r.anchor)
                    .ok_or_else(|| ScenarioError::DanglingAnchor {
                        set: r.id.clone(),
                        anchor: r.anchor.clone(),
                    })?;
                update_relative(r, &pos).map_err(|source| ScenarioError::Geometry {
                    set: r.id.clone(),
                    source,
                })
            }
        }
    }

    /// One-sample trace holding the initial states and sets.
    pub fn initial_trace(&self) -> Result<ExecutionTrace, ScenarioError> {
        let mut trace = ExecutionTrace::default();
        for a in &self.agents {
            trace.agents.insert(
                a.model.id().to_string(),
                AgentTrace {
                    state_trace: vec![StateSample {
                        t: 0.0,
                        state: a.init.clone(),
                    }],
                    mode_trace: Vec::new(),
                },
            );
        }
        for spec in &self.unsafe_sets {
            let def = self.resolve_set(spec, &trace)?;
            trace.unsafe_sets.insert(
                spec.id().to_string(),
                UnsafeTrace {
                    kind: spec.kind(),
                    state_trace: vec![SetSample { t: 0.0, def }],
                },
            );
        }
        Ok(trace)
    }

    /// Advances every agent one tick with `modes` (indexed like `agents`) and
    /// appends the new sample to `trace`.
    pub fn advance(&self, trace: &mut ExecutionTrace, modes: &[Mode]) -> Result<(), ScenarioError> {
        let t_now = trace.last_time().unwrap_or(0.0);
        let t_next = (grid_index(t_now, self.dt) + 1) as f64 * self.dt;
        let mut next = Vec::with_capacity(self.agents.len());
        for (agent, &mode) in self.agents.iter().zip(modes) {
            let id = agent.model.id();
            let state = trace
                .last_state(id)
                .ok_or_else(|| ScenarioError::UnknownAgent(id.to_string()))?;
            let s = agent
                .model
                .step(mode, state, self.dt, trace)
                .map_err(|source| ScenarioError::Step {
                    agent: id.to_string(),
                    t: t_now,
                    source,
                })?;
            next.push(s);
        }
        for ((agent, &mode), state) in self.agents.iter().zip(modes).zip(next) {
            let entry = trace
                .agents
                .get_mut(agent.model.id())
                .expect("agent present in trace");
            entry.mode_trace.push(mode);
            entry.state_trace.push(StateSample { t: t_next, state });
        }
        for spec in &self.unsafe_sets {
            let def = self.resolve_set(spec, trace)?;
            if let Some(u) = trace.unsafe_sets.get_mut(spec.id()) {
                u.state_trace.push(SetSample { t: t_next, def });
            }
        }
        Ok(())
    }

    /// Mode each agent is currently running: its latest decision, or its
    /// configured initial mode before any decision has been made.
    pub fn current_modes(&self, trace: &ExecutionTrace) -> Vec<Mode> {
        self.agents
            .iter()
            .map(|a| {
                trace
                    .agent(a.model.id())
                    .and_then(|t| t.mode_trace.last().copied())
                    .unwrap_or(a.mode)
            })
            .collect()
    }
}

/// An executable scenario.
pub struct Scenario {
    pub world: World,
    bindings: Vec<Option<RtaBinding>>,
    horizon: f64,
    initial: ExecutionTrace,
}

pub fn build_scenario(config: ScenarioConfig) -> Result<Scenario, ScenarioError> {
    let ScenarioConfig {
        agents,
        unsafe_sets,
        dt,
        horizon,
        dim,
    } = config;
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(ScenarioError::NonPositiveDt(dt));
    }
    if !(horizon > 0.0) || !horizon.is_finite() || horizon < dt {
        return Err(ScenarioError::BadHorizon { horizon, dt });
    }
    if agents.is_empty() {
        return Err(ScenarioError::NoAgents);
    }
    let mut ids = HashSet::new();
    for a in &agents {
        let id = a.model.id();
        if id.is_empty() || !ids.insert(id.to_string()) {
            return Err(ScenarioError::DuplicateId(id.to_string()));
        }
        if a.init.len() != a.model.state_dim() {
            return Err(ScenarioError::InitState {
                agent: id.to_string(),
                expected: a.model.state_dim(),
                found: a.init.len(),
            });
        }
        let pos = a.model.kinematics().position.len();
        if pos != dim {
            return Err(ScenarioError::Dimension {
                what: format!("agent {id:?} position"),
                expected: dim,
                found: pos,
            });
        }
        if let Some(b) = &a.rta {
            if b.logic().ego() != id {
                return Err(ScenarioError::EgoMismatch {
                    agent: id.to_string(),
                    ego: b.logic().ego().to_string(),
                });
            }
        }
    }
    for s in &unsafe_sets {
        if !ids.insert(s.id().to_string()) {
            return Err(ScenarioError::DuplicateId(s.id().to_string()));
        }
        if s.dim() != dim {
            return Err(ScenarioError::Dimension {
                what: format!("unsafe set {:?}", s.id()),
                expected: dim,
                found: s.dim(),
            });
        }
        if let Some(anchor) = s.anchor() {
            if !agents.iter().any(|a| a.model.id() == anchor) {
                return Err(ScenarioError::DanglingAnchor {
                    set: s.id().to_string(),
                    anchor: anchor.to_string(),
                });
            }
        }
    }
    let mut bindings = Vec::with_capacity(agents.len());
    let mut world_agents = Vec::with_capacity(agents.len());
    for a in agents {
        bindings.push(a.rta);
        world_agents.push(WorldAgent {
            model: a.model,
            init: a.init,
            mode: a.mode,
        });
    }
    let world = World {
        agents: world_agents,
        unsafe_sets,
        dt,
        dim,
    };
    let initial = world.initial_trace()?;
    Ok(Scenario {
        world,
        bindings,
        horizon,
        initial,
    })
}

impl Scenario {
    pub fn initial_trace(&self) -> &ExecutionTrace {
        &self.initial
    }

    pub fn initial_state(&self) -> SimState {
        self.initial.sample_at(0).expect("initial sample")
    }

    pub fn dt(&self) -> f64 {
        self.world.dt
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Number of transitions, `floor(T / dt)`.
    pub fn steps(&self) -> usize {
        let ratio = self.horizon / self.world.dt;
        // tolerate T/dt landing a hair under an integer
        (ratio + 1e-9 * ratio.max(1.0)).floor() as usize
    }

    pub fn binding(&self, agent: &str) -> Option<&RtaBinding> {
        let i = self.world.agent_index(agent)?;
        self.bindings[i].as_ref()
    }

    pub fn bindings(&self) -> impl Iterator<Item = (&str, &RtaBinding)> {
        self.world
            .agents
            .iter()
            .zip(&self.bindings)
            .filter_map(|(a, b)| b.as_ref().map(|b| (a.model.id(), b)))
    }

    /// Runs the closed loop over `[0, T]`. Collectors are reset first, so
    /// repeated runs produce identical traces and fresh collected data.
    pub fn execute(&mut self) -> Result<ExecutionTrace, ScenarioError> {
        for b in self.bindings.iter_mut().flatten() {
            b.reset_collector();
        }
        let mut trace = self.initial.clone();
        let mut modes = Vec::with_capacity(self.world.agents.len());
        for k in 0..self.steps() {
            let t = k as f64 * self.world.dt;
            modes.clear();
            for (agent, binding) in self.world.agents.iter().zip(self.bindings.iter_mut()) {
                let mode = match binding {
                    Some(b) => b.switch(&self.world, &trace).map_err(|e| ScenarioError::Rta {
                        agent: agent.model.id().to_string(),
                        t,
                        source: Box::new(e),
                    })?,
                    None => agent.mode,
                };
                modes.push(mode);
            }
            self.world.advance(&mut trace, &modes)?;
        }
        for (agent, b) in self.world.agents.iter().zip(self.bindings.iter_mut()) {
            if let Some(b) = b {
                b.finish(&trace).map_err(|e| ScenarioError::Rta {
                    agent: agent.model.id().to_string(),
                    t: trace.last_time().unwrap_or(0.0),
                    source: Box::new(e),
                })?;
            }
        }
        Ok(trace)
    }
}

/// Free-standing form of [`Scenario::execute`].
pub fn execute(scenario: &mut Scenario) -> Result<ExecutionTrace, ScenarioError> {
    scenario.execute()
}
