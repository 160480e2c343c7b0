//! Runtime-assurance decision modules.
//!
//! An [`RtaBinding`] wraps a user-supplied [`RtaLogic`]: every call to
//! [`RtaBinding::switch`] times the logic and, when collection is enabled,
//! hands the duration and the observed trace to its [`Collector`].

mod reach;
mod sim;

use std::fmt;
use std::time::Instant;

use thiserror::Error;

use crate::agents::Mode;
use crate::eval::{Collector, EvalError};
use crate::geometry::GeometryError;
use crate::scenario::{ExecutionTrace, ScenarioError, World};

pub use reach::{compute_reach_boxes, reach_rta_logic, BloatSchedule, ReachBox, ReachRta, DEFAULT_BLOAT_RATE};
pub use sim::{forward_simulate, sim_rta_logic, SimRta};

/// Prediction horizon used when none is configured.
pub const DEFAULT_PREDICTION_HORIZON: f64 = 1.0;

#[derive(Debug, Error)]
pub enum RtaError {
    #[error("ego agent {0:?} is not in the scenario")]
    MissingEgo(String),
    #[error("unknown unsafe set {0:?}")]
    UnknownSet(String),
    #[error("prediction horizon {horizon} is shorter than the time step {dt}")]
    Horizon { horizon: f64, dt: f64 },
    #[error("invalid bloat schedule: {0}")]
    Bloat(String),
    #[error("forward simulation failed: {0}")]
    Simulation(#[source] Box<ScenarioError>),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("collection failed: {0}")]
    Collect(#[from] EvalError),
    #[error("logic for ego {ego:?} failed: {source}")]
    Logic {
        ego: String,
        #[source]
        source: Box<RtaError>,
    },
    #[error("{0}")]
    Other(String),
}

impl From<ScenarioError> for RtaError {
    fn from(e: ScenarioError) -> Self {
        RtaError::Simulation(Box::new(e))
    }
}

/// Switching logic: picks the mode for one ego agent from the trace so far.
/// Implementations must be deterministic and must not depend on anything
/// but their arguments.
pub trait RtaLogic: Send + Sync + fmt::Debug {
    fn ego(&self) -> &str;

    fn decide(&self, world: &World, trace: &ExecutionTrace) -> Result<Mode, RtaError>;
}

/// Always returns the same mode.
#[derive(Debug, Clone)]
pub struct ConstantLogic {
    pub ego: String,
    pub mode: Mode,
}

impl RtaLogic for ConstantLogic {
    fn ego(&self) -> &str {
        &self.ego
    }

    fn decide(&self, _world: &World, _trace: &ExecutionTrace) -> Result<Mode, RtaError> {
        Ok(self.mode)
    }
}

/// A logic bound to one agent, plus optional data collection.
#[derive(Debug)]
pub struct RtaBinding {
    logic: Box<dyn RtaLogic>,
    collector: Option<Collector>,
}

impl RtaBinding {
    /// Collection is off until [`RtaBinding::setup_eval`] is called.
    pub fn new(logic: impl RtaLogic + 'static) -> Self {
        RtaBinding {
            logic: Box::new(logic),
            collector: None,
        }
    }

    pub fn with_eval(logic: impl RtaLogic + 'static) -> Self {
        let mut b = Self::new(logic);
        b.setup_eval();
        b
    }

    pub fn setup_eval(&mut self) {
        self.collector = Some(Collector::new(self.logic.ego()));
    }

    pub fn collecting(&self) -> bool {
        self.collector.is_some()
    }

    pub fn logic(&self) -> &dyn RtaLogic {
        self.logic.as_ref()
    }

    pub fn collector(&self) -> Option<&Collector> {
        self.collector.as_ref()
    }

    pub(crate) fn reset_collector(&mut self) {
        if let Some(c) = &mut self.collector {
            *c = Collector::new(self.logic.ego());
        }
    }

    /// Hands the completed run to the collector so its trace covers the
    /// final sample as well.
    pub(crate) fn finish(&mut self, trace: &ExecutionTrace) -> Result<(), RtaError> {
        if let Some(c) = &mut self.collector {
            c.collect_trace(trace)?;
        }
        Ok(())
    }

    /// Runs the logic, timing it. With collection on, records the duration
    /// and then the trace; the returned mode does not depend on collection.
    pub fn switch(&mut self, world: &World, trace: &ExecutionTrace) -> Result<Mode, RtaError> {
        let start = Instant::now();
        let decided = self.logic.decide(world, trace);
        let running_time = start.elapsed().as_secs_f64();
        let mode = decided.map_err(|e| RtaError::Logic {
            ego: self.logic.ego().to_string(),
            source: Box::new(e),
        })?;
        if let Some(c) = &mut self.collector {
            c.collect_computation_time(running_time)?;
            c.collect_trace(trace)?;
        }
        Ok(mode)
    }
}

/// Free-standing form of [`RtaBinding::switch`].
pub fn rta_switch(binding: &mut RtaBinding, world: &World, trace: &ExecutionTrace) -> Result<Mode, RtaError> {
    binding.switch(world, trace)
}

/// Unsafe sets a logic watches: the configured list, or every set not
/// anchored to the ego itself.
pub(crate) fn guarded_sets<'a>(
    world: &'a World,
    ego: &str,
    configured: Option<&'a [String]>,
) -> Result<Vec<&'a str>, RtaError> {
    match configured {
        Some(ids) => ids
            .iter()
            .map(|id| {
                world
                    .unsafe_sets
                    .iter()
                    .find(|s| s.id() == id)
                    .map(|s| s.id())
                    .ok_or_else(|| RtaError::UnknownSet(id.clone()))
            })
            .collect(),
        None => Ok(world
            .unsafe_sets
            .iter()
            .filter(|s| s.anchor() != Some(ego))
            .map(|s| s.id())
            .collect()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::{AccAgent, AccParams};
    use crate::scenario::{build_scenario, AgentConfig, ScenarioConfig};

    fn world() -> (World, ExecutionTrace) {
        let agent = AccAgent::new("ego", AccParams::default()).unwrap();
        let s = build_scenario(ScenarioConfig {
            agents: vec![AgentConfig::new(agent, vec![0.0, 0.0], Mode::Normal)],
            unsafe_sets: vec![],
            dt: 0.1,
            horizon: 1.0,
            dim: 1,
        })
        .unwrap();
        let tr = s.initial_trace().clone();
        (s.world, tr)
    }

    fn constant(mode: Mode) -> ConstantLogic {
        ConstantLogic {
            ego: "ego".into(),
            mode,
        }
    }

    #[test]
    fn constant_logic_records_one_sample() {
        let (w, tr) = world();
        let mut b = RtaBinding::with_eval(constant(Mode::Safety));
        assert_eq!(b.switch(&w, &tr).unwrap(), Mode::Safety);
        let c = b.collector().unwrap();
        assert_eq!(c.durations().len(), 1);
        assert!(c.durations()[0] >= 0.0 && c.durations()[0].is_finite());
        assert_eq!(c.trace().len(), 1);
    }

    #[test]
    fn collection_off_leaves_no_collector() {
        let (w, tr) = world();
        let mut b = RtaBinding::new(constant(Mode::Untrusted));
        assert_eq!(rta_switch(&mut b, &w, &tr).unwrap(), Mode::Untrusted);
        assert!(b.collector().is_none());
    }

    #[test]
    fn repeated_calls_count_samples() {
        let (w, tr) = world();
        let mut b = RtaBinding::with_eval(constant(Mode::Untrusted));
        let m1 = b.switch(&w, &tr).unwrap();
        let m2 = b.switch(&w, &tr).unwrap();
        assert_eq!(m1, m2);
        assert_eq!(b.collector().unwrap().durations().len(), 2);
    }

    #[derive(Debug)]
    struct Failing;

    impl RtaLogic for Failing {
        fn ego(&self) -> &str {
            "ego"
        }
        fn decide(&self, _: &World, _: &ExecutionTrace) -> Result<Mode, RtaError> {
            Err(RtaError::Other("boom".into()))
        }
    }

    #[test]
    fn failures_carry_the_ego() {
        let (w, tr) = world();
        let mut b = RtaBinding::with_eval(Failing);
        let err = b.switch(&w, &tr).unwrap_err();
        assert!(matches!(&err, RtaError::Logic { ego, .. } if ego == "ego"));
        assert!(b.collector().unwrap().durations().is_empty());
    }
}
