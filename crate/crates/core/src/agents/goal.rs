use std::fmt;
use std::sync::Arc;

use super::AgentError;
use crate::scenario::ExecutionTrace;

pub type GoalFn = Arc<dyn Fn(&ExecutionTrace) -> Result<Vec<f64>, AgentError> + Send + Sync>;

#[derive(Debug, Clone, PartialEq)]
pub struct Waypoint {
    pub t: f64,
    pub point: Vec<f64>,
}

/// Computes an agent's goal from the simulation trace.
#[derive(Clone, Default)]
pub enum Goal {
    #[default]
    None,
    Fixed(Vec<f64>),
    /// Latest state of `agent`, with `offset` added to its leading entries.
    Follow {
        agent: String,
        offset: Vec<f64>,
    },
    /// Timed waypoints, linearly interpolated at the trace's current time and
    /// held constant outside the first/last waypoint.
    Path(Vec<Waypoint>),
    Custom(GoalFn),
}

impl fmt::Debug for Goal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Goal::None => f.write_str("None"),
            Goal::Fixed(g) => f.debug_tuple("Fixed").field(g).finish(),
            Goal::Follow { agent, offset } => f
                .debug_struct("Follow")
                .field("agent", agent)
                .field("offset", offset)
                .finish(),
            Goal::Path(w) => f.debug_tuple("Path").field(w).finish(),
            Goal::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl Goal {
    /// Agent ids this goal reads from the trace.
    pub fn depends_on(&self) -> Option<&str> {
        match self {
            Goal::Follow { agent, .. } => Some(agent),
            _ => None,
        }
    }

    pub fn resolve(&self, trace: &ExecutionTrace) -> Result<Option<Vec<f64>>, AgentError> {
        match self {
            Goal::None => Ok(None),
            Goal::Fixed(g) => Ok(Some(g.clone())),
            Goal::Follow { agent, offset } => {
                let mut g = trace
                    .last_state(agent)
                    .ok_or_else(|| AgentError::MissingAgent(agent.clone()))?
                    .to_vec();
                if offset.len() > g.len() {
                    return Err(AgentError::Goal(format!(
                        "offset has {} entries but {agent:?} state has {}",
                        offset.len(),
                        g.len()
                    )));
                }
                for (x, o) in g.iter_mut().zip(offset) {
                    *x += o;
                }
                Ok(Some(g))
            }
            Goal::Path(points) => {
                let t = trace.last_time().unwrap_or(0.0);
                Ok(interpolate(points, t))
            }
            Goal::Custom(f) => f(trace).map(Some),
        }
    }
}

fn interpolate(points: &[Waypoint], t: f64) -> Option<Vec<f64>> {
    let first = points.first()?;
    if t <= first.t {
        return Some(first.point.clone());
    }
    for w in points.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if t <= b.t {
            let span = b.t - a.t;
            let s = if span > 0.0 { (t - a.t) / span } else { 1.0 };
            return Some(
                a.point
                    .iter()
                    .zip(&b.point)
                    .map(|(&p, &q)| p + s * (q - p))
                    .collect(),
            );
        }
    }
    points.last().map(|w| w.point.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_interpolation() {
        let pts = vec![
            Waypoint {
                t: 0.0,
                point: vec![0.0, 0.0],
            },
            Waypoint {
                t: 10.0,
                point: vec![10.0, 20.0],
            },
        ];
        assert_eq!(interpolate(&pts, -1.0), Some(vec![0.0, 0.0]));
        assert_eq!(interpolate(&pts, 5.0), Some(vec![5.0, 10.0]));
        assert_eq!(interpolate(&pts, 50.0), Some(vec![10.0, 20.0]));
        assert_eq!(interpolate(&[], 1.0), None);
    }
}
