use indexmap::IndexMap;

use super::EvalError;
use crate::agents::{Kinematics, ModelKind, VelocityRule};
use crate::geometry::SetDef;
use crate::scenario::{ExecutionTrace, UnsafeSpec, World};

/// What evaluation needs to know beyond the trace itself.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvalMeta {
    pub kinematics: IndexMap<String, Kinematics>,
    /// Unsafe set id to the agent it is attached to.
    pub anchors: IndexMap<String, String>,
    /// Collision distance used when the TTC target is this agent.
    pub collision_radius: IndexMap<String, f64>,
    pub default_collision_radius: f64,
    /// Look-ahead for stepped TTC searches; defaults to the trace span.
    pub ttc_horizon: Option<f64>,
}

fn ball_radius(def: &SetDef<f64>) -> Option<f64> {
    match def {
        SetDef::Ball { radius, .. } => Some(*radius),
        _ => None,
    }
}

impl EvalMeta {
    pub fn from_world(world: &World) -> Self {
        let mut meta = EvalMeta::default();
        for a in &world.agents {
            meta.kinematics.insert(a.model.id().to_string(), a.model.kinematics());
        }
        for s in &world.unsafe_sets {
            if let UnsafeSpec::Relative(r) = s {
                meta.anchors.insert(r.id.clone(), r.anchor.clone());
                if let Some(radius) = ball_radius(&r.base) {
                    let e = meta.collision_radius.entry(r.anchor.clone()).or_insert(0.0);
                    *e = e.max(radius);
                }
            }
        }
        meta
    }

    /// Best guess for a trace with no accompanying configuration. State
    /// lengths matching a built-in model get that model's layout; a set
    /// whose reference point keeps a constant offset from a moving agent is
    /// treated as anchored to it.
    pub fn infer(trace: &ExecutionTrace) -> Self {
        let mut meta = EvalMeta::default();
        let dim = trace
            .unsafe_sets
            .values()
            .find_map(|u| u.state_trace.first().map(|s| s.def.dim()));
        for (id, a) in &trace.agents {
            let n = a.state_trace.first().map_or(0, |s| s.state.len());
            let builtin = [ModelKind::Acc, ModelKind::DubinsCar, ModelKind::DubinsPlane]
                .into_iter()
                .find(|m| m.state_dim() == n)
                .map(ModelKind::kinematics)
                .filter(|k| dim.is_none_or(|d| k.position.len() == d));
            let kin = builtin.unwrap_or_else(|| Kinematics {
                position: (0..dim.unwrap_or(n).min(n)).collect(),
                velocity: VelocityRule::FiniteDifference,
            });
            meta.kinematics.insert(id.clone(), kin);
        }
        for (set_id, u) in &trace.unsafe_sets {
            if matches!(u.state_trace.first().map(|s| &s.def), Some(SetDef::Polytope(_)) | None) {
                continue;
            }
            let refs: Vec<Vec<f64>> = u.state_trace.iter().map(|s| s.def.reference_point()).collect();
            for (agent_id, a) in &trace.agents {
                let kin = &meta.kinematics[agent_id.as_str()];
                let Some(pos) = a
                    .state_trace
                    .iter()
                    .map(|s| kin.position_of(&s.state))
                    .collect::<Option<Vec<_>>>()
                else {
                    continue;
                };
                if pos.first().is_none_or(|p| p.len() != refs[0].len()) {
                    continue;
                }
                let moves = pos.iter().any(|p| p != &pos[0]);
                let offset: Vec<f64> = refs[0].iter().zip(&pos[0]).map(|(r, p)| r - p).collect();
                let fixed = refs.iter().zip(&pos).all(|(r, p)| {
                    r.iter()
                        .zip(p)
                        .zip(&offset)
                        .all(|((r, p), o)| ((r - p) - o).abs() <= 1e-9 * (1.0 + r.abs()))
                });
                if moves && fixed {
                    meta.anchors.insert(set_id.clone(), agent_id.clone());
                    if let Some(radius) = u.state_trace.first().and_then(|s| ball_radius(&s.def)) {
                        let e = meta.collision_radius.entry(agent_id.clone()).or_insert(0.0);
                        *e = e.max(radius);
                    }
                    break;
                }
            }
        }
        meta
    }

    pub fn kinematics_of(&self, agent: &str) -> Result<&Kinematics, EvalError> {
        self.kinematics
            .get(agent)
            .ok_or_else(|| EvalError::UnknownId(agent.to_string()))
    }

    pub fn collision_radius_of(&self, target: &str) -> f64 {
        self.collision_radius
            .get(target)
            .copied()
            .unwrap_or(self.default_collision_radius)
    }

    pub fn anchor_of(&self, set: &str) -> Option<&str> {
        self.anchors.get(set).map(String::as_str)
    }
}
