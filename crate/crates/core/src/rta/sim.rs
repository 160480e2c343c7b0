use super::{guarded_sets, RtaError, RtaLogic, DEFAULT_PREDICTION_HORIZON};
use crate::agents::Mode;
use crate::scenario::{ExecutionTrace, World};

/// Simulation-based switching: predict the ego under its untrusted
/// controller and fall back to SAFETY if the prediction enters a guarded set.
#[derive(Debug, Clone)]
pub struct SimRta {
    pub ego: String,
    pub horizon: f64,
    /// `None` guards every set not anchored to the ego.
    pub guards: Option<Vec<String>>,
}

impl SimRta {
    pub fn new(ego: impl Into<String>) -> Self {
        SimRta {
            ego: ego.into(),
            horizon: DEFAULT_PREDICTION_HORIZON,
            guards: None,
        }
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

impl RtaLogic for SimRta {
    fn ego(&self) -> &str {
        &self.ego
    }

    fn decide(&self, world: &World, trace: &ExecutionTrace) -> Result<Mode, RtaError> {
        sim_rta_logic(self, world, trace)
    }
}

pub(crate) fn prediction_steps(world: &World, horizon: f64) -> Result<usize, RtaError> {
    let ratio = horizon / world.dt;
    if !(ratio.is_finite()) || ratio < 1.0 - 1e-9 {
        return Err(RtaError::Horizon {
            horizon,
            dt: world.dt,
        });
    }
    Ok((ratio + 1e-9 * ratio).floor() as usize)
}

/// Predicts `[t_now, t_now + horizon]` starting from the last sample of
/// `trace`: the ego runs UNTRUSTED, every other agent keeps its current
/// mode, relative sets follow their predicted anchors.
pub fn forward_simulate(
    world: &World,
    trace: &ExecutionTrace,
    ego: &str,
    horizon: f64,
) -> Result<ExecutionTrace, RtaError> {
    let steps = prediction_steps(world, horizon)?;
    let ego_index = world
        .agent_index(ego)
        .ok_or_else(|| RtaError::MissingEgo(ego.to_string()))?;
    if trace.last_state(ego).is_none() {
        return Err(RtaError::MissingEgo(ego.to_string()));
    }
    let mut modes = world.current_modes(trace);
    modes[ego_index] = Mode::Untrusted;
    let mut predicted = trace.tail();
    for _ in 0..steps {
        world.advance(&mut predicted, &modes)?;
    }
    Ok(predicted)
}

pub fn sim_rta_logic(logic: &SimRta, world: &World, trace: &ExecutionTrace) -> Result<Mode, RtaError> {
    let predicted = forward_simulate(world, trace, &logic.ego, logic.horizon)?;
    let kinematics = world
        .agent(&logic.ego)
        .ok_or_else(|| RtaError::MissingEgo(logic.ego.clone()))?
        .model
        .kinematics();
    let ego_trace = &predicted.agents[logic.ego.as_str()].state_trace;
    for id in guarded_sets(world, &logic.ego, logic.guards.as_deref())? {
        let sets = &predicted.unsafe_sets[id].state_trace;
        for (sample, set) in ego_trace.iter().zip(sets) {
            let pos = kinematics
                .position_of(&sample.state)
                .ok_or_else(|| RtaError::MissingEgo(logic.ego.clone()))?;
            if set.def.contains(&pos)? {
                return Ok(Mode::Safety);
            }
        }
    }
    Ok(Mode::Untrusted)
}
