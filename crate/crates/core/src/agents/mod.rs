//! Agent models.
//!
//! Every model folds its safety controller, its untrusted controller and its
//! plant into one `step`; the [`Mode`] picks which command the plant gets.
//! By convention the workspace position occupies the leading state entries.

pub mod acc;
pub mod dubins;
mod goal;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scenario::ExecutionTrace;

pub use acc::{acc_command, acc_step, AccAgent, AccParams, AccState};
pub use dubins::{
    dubins_car_step, dubins_plane_step, DubinsCarAgent, DubinsCarParams, DubinsCarState,
    DubinsPlaneAgent, DubinsPlaneParams, DubinsPlaneState,
};
pub use goal::{Goal, GoalFn, Waypoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Mode {
    Safety,
    Untrusted,
    Normal,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Safety, Mode::Untrusted, Mode::Normal];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Safety => "SAFETY",
            Mode::Untrusted => "UNTRUSTED",
            Mode::Normal => "NORMAL",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown mode {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AgentError {
    #[error("time step must be positive, got {0}")]
    NonPositiveDt(f64),
    #[error("agent {0:?} is not present in the trace")]
    MissingAgent(String),
    #[error("mode {0} needs a goal but none is configured")]
    MissingGoal(Mode),
    #[error("state has {found} entries, expected {expected}")]
    StateDimension { expected: usize, found: usize },
    #[error("invalid parameter {name}: {reason}")]
    InvalidParam { name: &'static str, reason: String },
    #[error("goal: {0}")]
    Goal(String),
}

/// How workspace velocity is read off a state vector.
#[derive(Debug, Clone, PartialEq)]
pub enum VelocityRule {
    /// Velocity components are stored directly at these indices.
    Components(Vec<usize>),
    /// `v cos(heading), v sin(heading)` and, with a pitch index, `v sin(pitch)`.
    Heading {
        speed: usize,
        heading: usize,
        pitch: Option<usize>,
    },
    /// Not declared by the model; estimate from successive positions.
    FiniteDifference,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Kinematics {
    pub position: Vec<usize>,
    pub velocity: VelocityRule,
}

impl Kinematics {
    pub fn position_of(&self, state: &[f64]) -> Option<Vec<f64>> {
        self.position.iter().map(|&i| state.get(i).copied()).collect()
    }

    /// `None` when the rule is [`VelocityRule::FiniteDifference`] or indices are out of range.
    pub fn velocity_of(&self, state: &[f64]) -> Option<Vec<f64>> {
        match &self.velocity {
            VelocityRule::Components(idx) => idx.iter().map(|&i| state.get(i).copied()).collect(),
            VelocityRule::Heading {
                speed,
                heading,
                pitch,
            } => {
                let v = *state.get(*speed)?;
                let th = *state.get(*heading)?;
                let mut out = vec![v * th.cos(), v * th.sin()];
                if let Some(p) = pitch {
                    out.push(v * state.get(*p)?.sin());
                }
                Some(out)
            }
            VelocityRule::FiniteDifference => None,
        }
    }
}

/// Built-in model families, as named in scenario files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Acc,
    DubinsCar,
    DubinsPlane,
}

impl ModelKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "acc" => Some(ModelKind::Acc),
            "dubins_car" => Some(ModelKind::DubinsCar),
            "dubins_plane" => Some(ModelKind::DubinsPlane),
            _ => None,
        }
    }

    pub fn state_dim(self) -> usize {
        match self {
            ModelKind::Acc => 2,
            ModelKind::DubinsCar => 4,
            ModelKind::DubinsPlane => 6,
        }
    }

    pub fn kinematics(self) -> Kinematics {
        match self {
            ModelKind::Acc => Kinematics {
                position: vec![0],
                velocity: VelocityRule::Components(vec![1]),
            },
            ModelKind::DubinsCar => Kinematics {
                position: vec![0, 1],
                velocity: VelocityRule::Heading {
                    speed: 3,
                    heading: 2,
                    pitch: None,
                },
            },
            ModelKind::DubinsPlane => Kinematics {
                position: vec![0, 1, 2],
                velocity: VelocityRule::Heading {
                    speed: 5,
                    heading: 3,
                    pitch: Some(4),
                },
            },
        }
    }
}

/// An agent that the execution engine can advance.
pub trait AgentModel: Send + Sync + fmt::Debug {
    fn id(&self) -> &str;

    fn state_dim(&self) -> usize;

    fn kinematics(&self) -> Kinematics;

    /// Next state after `dt` under `mode`. `trace` is the simulation so far;
    /// its last sample holds the current state of every agent.
    fn step(
        &self,
        mode: Mode,
        state: &[f64],
        dt: f64,
        trace: &ExecutionTrace,
    ) -> Result<Vec<f64>, AgentError>;
}

pub(crate) fn check_step_args(dt: f64, state: &[f64], expected: usize) -> Result<(), AgentError> {
    if !(dt > 0.0) {
        return Err(AgentError::NonPositiveDt(dt));
    }
    if state.len() != expected {
        return Err(AgentError::StateDimension {
            expected,
            found: state.len(),
        });
    }
    Ok(())
}
