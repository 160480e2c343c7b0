use indexmap::IndexMap;
use thiserror::Error;

use crate::agents::Mode;
use crate::geometry::{SetDef, SetKind};

#[derive(Debug, Clone, PartialEq)]
pub struct StateSample {
    pub t: f64,
    pub state: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AgentTrace {
    pub state_trace: Vec<StateSample>,
    /// `mode_trace[k]` is the mode applied on the way from sample `k` to `k + 1`.
    pub mode_trace: Vec<Mode>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SetSample {
    pub t: f64,
    pub def: SetDef<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnsafeTrace {
    pub kind: SetKind,
    pub state_trace: Vec<SetSample>,
}

/// Time-stamped agent states, mode decisions and unsafe-set definitions.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExecutionTrace {
    pub agents: IndexMap<String, AgentTrace>,
    pub unsafe_sets: IndexMap<String, UnsafeTrace>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TraceError {
    #[error("trace is empty")]
    Empty,
    #[error("{path}: {message}")]
    Invariant { path: String, message: String },
    #[error("time {t} is outside the recorded range [{first}, {last}]")]
    OutOfRange { t: f64, first: f64, last: f64 },
}

fn invariant(path: impl Into<String>, message: impl Into<String>) -> TraceError {
    TraceError::Invariant {
        path: path.into(),
        message: message.into(),
    }
}

/// Slack used when matching a query time against the sample grid.
pub(crate) fn time_slack(t: f64) -> f64 {
    1e-9 * t.abs().max(1.0)
}

/// State of the whole scenario at one recorded timestamp.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub agents: IndexMap<String, AgentSnapshot>,
    pub unsafe_sets: IndexMap<String, SetDef<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentSnapshot {
    pub state: Vec<f64>,
    /// Mode leaving this sample; the final sample carries the last decision.
    pub mode: Option<Mode>,
}

impl ExecutionTrace {
    pub fn agent(&self, id: &str) -> Option<&AgentTrace> {
        self.agents.get(id)
    }

    pub fn last_state(&self, id: &str) -> Option<&[f64]> {
        self.agents
            .get(id)?
            .state_trace
            .last()
            .map(|s| s.state.as_slice())
    }

    pub fn last_set(&self, id: &str) -> Option<&SetDef<f64>> {
        self.unsafe_sets.get(id)?.state_trace.last().map(|s| &s.def)
    }

    pub fn len(&self) -> usize {
        self.agents
            .values()
            .map(|a| a.state_trace.len())
            .chain(self.unsafe_sets.values().map(|u| u.state_trace.len()))
            .next()
            .unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn times(&self) -> Vec<f64> {
        if let Some(a) = self.agents.values().next() {
            a.state_trace.iter().map(|s| s.t).collect()
        } else if let Some(u) = self.unsafe_sets.values().next() {
            u.state_trace.iter().map(|s| s.t).collect()
        } else {
            Vec::new()
        }
    }

    pub fn last_time(&self) -> Option<f64> {
        if let Some(a) = self.agents.values().next() {
            a.state_trace.last().map(|s| s.t)
        } else {
            self.unsafe_sets
                .values()
                .next()
                .and_then(|u| u.state_trace.last().map(|s| s.t))
        }
    }

    /// First `samples` samples with the modes leading up to the last of them.
    pub fn prefix(&self, samples: usize) -> ExecutionTrace {
        let agents = self
            .agents
            .iter()
            .map(|(id, a)| {
                let n = samples.min(a.state_trace.len());
                let trace = AgentTrace {
                    state_trace: a.state_trace[..n].to_vec(),
                    mode_trace: a.mode_trace[..n.saturating_sub(1).min(a.mode_trace.len())].to_vec(),
                };
                (id.clone(), trace)
            })
            .collect();
        let unsafe_sets = self
            .unsafe_sets
            .iter()
            .map(|(id, u)| {
                let n = samples.min(u.state_trace.len());
                let trace = UnsafeTrace {
                    kind: u.kind,
                    state_trace: u.state_trace[..n].to_vec(),
                };
                (id.clone(), trace)
            })
            .collect();
        ExecutionTrace {
            agents,
            unsafe_sets,
        }
    }

    /// Only the final sample of every agent and set, with no modes.
    pub fn tail(&self) -> ExecutionTrace {
        let agents = self
            .agents
            .iter()
            .map(|(id, a)| {
                let trace = AgentTrace {
                    state_trace: a.state_trace.last().cloned().into_iter().collect(),
                    mode_trace: Vec::new(),
                };
                (id.clone(), trace)
            })
            .collect();
        let unsafe_sets = self
            .unsafe_sets
            .iter()
            .map(|(id, u)| {
                let trace = UnsafeTrace {
                    kind: u.kind,
                    state_trace: u.state_trace.last().cloned().into_iter().collect(),
                };
                (id.clone(), trace)
            })
            .collect();
        ExecutionTrace {
            agents,
            unsafe_sets,
        }
    }

    /// Checks the structural invariants: shared strictly increasing
    /// timestamps, one mode per transition, consistent state lengths and
    /// set types matching their definitions.
    pub fn validate(&self) -> Result<(), TraceError> {
        let times = self.times();
        if let Some(w) = times.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(invariant(
                "agents",
                format!("timestamps must strictly increase ({} then {})", w[0], w[1]),
            ));
        }
        for (id, a) in &self.agents {
            let path = format!("agents.{id}.state_trace");
            if a.state_trace.iter().map(|s| s.t).ne(times.iter().copied()) {
                return Err(invariant(path, "timestamps differ from the other traces"));
            }
            if let Some(first) = a.state_trace.first() {
                if let Some(k) = a
                    .state_trace
                    .iter()
                    .position(|s| s.state.len() != first.state.len())
                {
                    return Err(invariant(
                        format!("{path}[{k}]"),
                        "state length differs from the first sample",
                    ));
                }
            }
            if a.mode_trace.len() + 1 != a.state_trace.len().max(1) {
                return Err(invariant(
                    format!("agents.{id}.mode_trace"),
                    format!(
                        "expected {} modes for {} states",
                        a.state_trace.len().saturating_sub(1),
                        a.state_trace.len()
                    ),
                ));
            }
        }
        for (id, u) in &self.unsafe_sets {
            let path = format!("unsafe.{id}.state_trace");
            if u.state_trace.iter().map(|s| s.t).ne(times.iter().copied()) {
                return Err(invariant(path, "timestamps differ from the agent traces"));
            }
            if let Some(k) = u.state_trace.iter().position(|s| s.def.kind() != u.kind) {
                return Err(invariant(
                    format!("{path}[{k}]"),
                    format!("definition is not a {}", u.kind),
                ));
            }
        }
        Ok(())
    }

    pub fn sample_at(&self, k: usize) -> Option<SimState> {
        let t = *self.times().get(k)?;
        let agents = self
            .agents
            .iter()
            .map(|(id, a)| {
                let mode = a.mode_trace.get(k).or(a.mode_trace.last()).copied();
                let snap = AgentSnapshot {
                    state: a.state_trace[k].state.clone(),
                    mode,
                };
                (id.clone(), snap)
            })
            .collect();
        let unsafe_sets = self
            .unsafe_sets
            .iter()
            .map(|(id, u)| (id.clone(), u.state_trace[k].def.clone()))
            .collect();
        Some(SimState {
            t,
            agents,
            unsafe_sets,
        })
    }

    /// State at the largest recorded timestamp not after `t`.
    pub fn snapshot(&self, t: f64) -> Result<SimState, TraceError> {
        let times = self.times();
        let (first, last) = match (times.first(), times.last()) {
            (Some(&f), Some(&l)) => (f, l),
            _ => return Err(TraceError::Empty),
        };
        if !t.is_finite() || t < first - time_slack(first) || t > last + time_slack(last) {
            return Err(TraceError::OutOfRange { t, first, last });
        }
        let k = times.partition_point(|&tk| tk <= t + time_slack(t)).max(1) - 1;
        Ok(self.sample_at(k).expect("index within trace"))
    }
}

/// Free-standing form of [`ExecutionTrace::snapshot`].
pub fn snapshot(trace: &ExecutionTrace, t: f64) -> Result<SimState, TraceError> {
    trace.snapshot(t)
}
