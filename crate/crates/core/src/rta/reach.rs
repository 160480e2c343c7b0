use serde::{Deserialize, Serialize};

use super::sim::forward_simulate;
use super::{guarded_sets, RtaError, RtaLogic, DEFAULT_PREDICTION_HORIZON};
use crate::agents::Mode;
use crate::scenario::{ExecutionTrace, World};

/// Default inflation rate (position units per second of prediction).
pub const DEFAULT_BLOAT_RATE: f64 = 0.1;

/// Per-axis inflation applied to the k-th predicted sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BloatSchedule {
    /// `rate * k * dt`
    Linear { rate: f64 },
    /// Explicit values; the last one repeats past the end.
    Table(Vec<f64>),
}

impl Default for BloatSchedule {
    fn default() -> Self {
        BloatSchedule::Linear {
            rate: DEFAULT_BLOAT_RATE,
        }
    }
}

impl BloatSchedule {
    pub fn zero() -> Self {
        BloatSchedule::Linear { rate: 0.0 }
    }

    pub fn validate(&self) -> Result<(), RtaError> {
        match self {
            BloatSchedule::Linear { rate } => {
                if !rate.is_finite() || *rate < 0.0 {
                    return Err(RtaError::Bloat(format!("rate must be finite and >= 0, got {rate}")));
                }
            }
            BloatSchedule::Table(v) => {
                if v.iter().any(|x| !x.is_finite() || *x < 0.0) {
                    return Err(RtaError::Bloat("entries must be finite and >= 0".into()));
                }
                if v.windows(2).any(|w| w[1] < w[0]) {
                    return Err(RtaError::Bloat("entries must be nondecreasing".into()));
                }
            }
        }
        Ok(())
    }

    pub fn at(&self, k: usize, dt: f64) -> f64 {
        match self {
            BloatSchedule::Linear { rate } => rate * k as f64 * dt,
            BloatSchedule::Table(v) => v.get(k).or(v.last()).copied().unwrap_or(0.0),
        }
    }
}

/// Axis-aligned box over the ego's position coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ReachBox {
    pub t: f64,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// Reachability-based switching: like [`super::SimRta`], but each predicted
/// position is inflated into a box before the intersection test.
#[derive(Debug, Clone)]
pub struct ReachRta {
    pub ego: String,
    pub horizon: f64,
    pub guards: Option<Vec<String>>,
    pub bloat: BloatSchedule,
}

impl ReachRta {
    pub fn new(ego: impl Into<String>, bloat: BloatSchedule) -> Result<Self, RtaError> {
        bloat.validate()?;
        Ok(ReachRta {
            ego: ego.into(),
            horizon: DEFAULT_PREDICTION_HORIZON,
            guards: None,
            bloat,
        })
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn guarding(mut self, ids: Vec<String>) -> Self {
        self.guards = Some(ids);
        self
    }
}

impl RtaLogic for ReachRta {
    fn ego(&self) -> &str {
        &self.ego
    }

    fn decide(&self, world: &World, trace: &ExecutionTrace) -> Result<Mode, RtaError> {
        reach_rta_logic(self, world, trace)
    }
}

fn boxes_from(
    world: &World,
    predicted: &ExecutionTrace,
    ego: &str,
    bloat: &BloatSchedule,
) -> Result<Vec<ReachBox>, RtaError> {
    let kinematics = world
        .agent(ego)
        .ok_or_else(|| RtaError::MissingEgo(ego.to_string()))?
        .model
        .kinematics();
    predicted.agents[ego]
        .state_trace
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let pos = kinematics
                .position_of(&s.state)
                .ok_or_else(|| RtaError::MissingEgo(ego.to_string()))?;
            let r = bloat.at(k, world.dt);
            Ok(ReachBox {
                t: s.t,
                lower: pos.iter().map(|x| x - r).collect(),
                upper: pos.iter().map(|x| x + r).collect(),
            })
        })
        .collect()
}

/// Boxes around the nominal prediction, one per predicted sample starting
/// with the current one (index 0, inflated by `bloat.at(0)`).
pub fn compute_reach_boxes(
    world: &World,
    trace: &ExecutionTrace,
    ego: &str,
    horizon: f64,
    bloat: &BloatSchedule,
) -> Result<Vec<ReachBox>, RtaError> {
    bloat.validate()?;
    let predicted = forward_simulate(world, trace, ego, horizon)?;
    boxes_from(world, &predicted, ego, bloat)
}

pub fn reach_rta_logic(logic: &ReachRta, world: &World, trace: &ExecutionTrace) -> Result<Mode, RtaError> {
    let predicted = forward_simulate(world, trace, &logic.ego, logic.horizon)?;
    let boxes = boxes_from(world, &predicted, &logic.ego, &logic.bloat)?;
    for id in guarded_sets(world, &logic.ego, logic.guards.as_deref())? {
        let sets = &predicted.unsafe_sets[id].state_trace;
        for (b, set) in boxes.iter().zip(sets) {
            if set.def.intersects_box(&b.lower, &b.upper)? {
                return Ok(Mode::Safety);
            }
        }
    }
    Ok(Mode::Untrusted)
}
