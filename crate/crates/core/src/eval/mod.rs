//! Data collection during execution and post-hoc evaluation.

mod export;
mod meta;
mod metrics;
mod report;

use std::collections::HashSet;
use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;

use crate::geometry::GeometryError;
use crate::scenario::ExecutionTrace;

pub use export::{series_file_name, write_outputs, write_series_csv, OutputFiles};
pub use meta::EvalMeta;
pub use metrics::{controller_usage, distance_series, ttc, ttc_series, ControllerUsage, Series};
pub use report::{evaluate, summary, AgentReport, EvalReport};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("unknown id {0:?}")]
    UnknownId(String),
    #[error("t = {0} is not a recorded timestamp")]
    OffGrid(f64),
    #[error("duration must be finite and >= 0, got {0}")]
    BadDuration(f64),
    #[error("collected ids differ: {0}")]
    IdMismatch(String),
    #[error("snapshot does not extend the collected trace: {0}")]
    NotAnExtension(String),
    #[error("agent {0:?}: state too short for its declared position indices")]
    Position(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimingStats {
    pub avg_s: f64,
    pub min_s: f64,
    pub max_s: f64,
    pub count: usize,
}

impl TimingStats {
    /// `None` for an empty sample set.
    pub fn from_samples(samples: &[f64]) -> Option<TimingStats> {
        if samples.is_empty() {
            return None;
        }
        let min = samples.iter().copied().fold(f64::INFINITY, f64::min);
        let max = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean = samples.iter().sum::<f64>() / samples.len() as f64;
        Some(TimingStats {
            // rounding can push the mean a hair outside [min, max]
            avg_s: mean.clamp(min, max),
            min_s: min,
            max_s: max,
            count: samples.len(),
        })
    }
}

/// Running record kept by one RTA binding: the trace it has observed and
/// the duration of every decision.
#[derive(Debug, Clone, PartialEq)]
pub struct Collector {
    ego: String,
    trace: ExecutionTrace,
    durations: Vec<f64>,
}

fn key_set<V>(m: &indexmap::IndexMap<String, V>) -> HashSet<&str> {
    m.keys().map(String::as_str).collect()
}

impl Collector {
    pub fn new(ego: impl Into<String>) -> Self {
        Collector {
            ego: ego.into(),
            trace: ExecutionTrace::default(),
            durations: Vec::new(),
        }
    }

    pub fn ego(&self) -> &str {
        &self.ego
    }

    pub fn trace(&self) -> &ExecutionTrace {
        &self.trace
    }

    pub fn durations(&self) -> &[f64] {
        &self.durations
    }

    /// Extends the collected trace to `snapshot`, which must start with
    /// everything collected so far.
    pub fn collect_trace(&mut self, snapshot: &ExecutionTrace) -> Result<(), EvalError> {
        if self.trace.agents.is_empty() {
            self.trace = snapshot.clone();
            return Ok(());
        }
        if key_set(&self.trace.agents) != key_set(&snapshot.agents) {
            return Err(EvalError::IdMismatch("agent ids".into()));
        }
        if key_set(&self.trace.unsafe_sets) != key_set(&snapshot.unsafe_sets) {
            return Err(EvalError::IdMismatch("unsafe set ids".into()));
        }
        let have = self.trace.len();
        if snapshot.len() < have {
            return Err(EvalError::NotAnExtension(format!(
                "{} samples collected, snapshot has {}",
                have,
                snapshot.len()
            )));
        }
        let old = self.trace.times();
        let new = snapshot.times();
        if have > 0 && (old[0] != new[0] || old[have - 1] != new[have - 1]) {
            return Err(EvalError::NotAnExtension("timestamps differ".into()));
        }
        for (id, a) in &snapshot.agents {
            let mine = &mut self.trace.agents[id.as_str()];
            let (ns, nm) = (mine.state_trace.len(), mine.mode_trace.len());
            mine.state_trace.extend_from_slice(&a.state_trace[ns.min(a.state_trace.len())..]);
            mine.mode_trace.extend_from_slice(&a.mode_trace[nm.min(a.mode_trace.len())..]);
        }
        for (id, u) in &snapshot.unsafe_sets {
            let mine = &mut self.trace.unsafe_sets[id.as_str()];
            let n = mine.state_trace.len();
            mine.state_trace.extend_from_slice(&u.state_trace[n.min(u.state_trace.len())..]);
        }
        Ok(())
    }

    pub fn collect_computation_time(&mut self, duration: f64) -> Result<(), EvalError> {
        if !duration.is_finite() || duration < 0.0 {
            return Err(EvalError::BadDuration(duration));
        }
        self.durations.push(duration);
        Ok(())
    }

    pub fn computation_time_stats(&self) -> Option<TimingStats> {
        TimingStats::from_samples(&self.durations)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{AgentTrace, StateSample};

    fn line(n: usize, ids: &[&str]) -> ExecutionTrace {
        let mut tr = ExecutionTrace::default();
        for id in ids {
            let mut a = AgentTrace::default();
            for k in 0..n {
                a.state_trace.push(StateSample {
                    t: k as f64 * 0.1,
                    state: vec![k as f64, 1.0],
                });
                if k > 0 {
                    a.mode_trace.push(crate::agents::Mode::Normal);
                }
            }
            tr.agents.insert(id.to_string(), a);
        }
        tr
    }

    #[test]
    fn trace_collection_appends() {
        let mut c = Collector::new("a");
        c.collect_trace(&line(1, &["a"])).unwrap();
        assert_eq!(c.trace().len(), 1);
        c.collect_trace(&line(2, &["a"])).unwrap();
        assert_eq!(c.trace().len(), 2);
        c.collect_trace(&line(2, &["a"])).unwrap();
        assert_eq!(c.trace(), &line(2, &["a"]));
        c.trace().validate().unwrap();
    }

    #[test]
    fn trace_collection_rejects_mismatch() {
        let mut c = Collector::new("a");
        c.collect_trace(&line(1, &["a"])).unwrap();
        assert!(matches!(c.collect_trace(&line(2, &["b"])), Err(EvalError::IdMismatch(_))));
        c.collect_trace(&line(3, &["a"])).unwrap();
        assert!(matches!(c.collect_trace(&line(2, &["a"])), Err(EvalError::NotAnExtension(_))));
    }

    #[test]
    fn durations() {
        let mut c = Collector::new("a");
        assert_eq!(c.computation_time_stats(), None);
        c.collect_computation_time(0.0).unwrap();
        assert_eq!(c.durations(), [0.0]);
        assert!(matches!(c.collect_computation_time(-1.0), Err(EvalError::BadDuration(_))));
        c.collect_computation_time(0.004).unwrap();
        c.collect_computation_time(0.002).unwrap();
        assert_eq!(c.durations().len(), 3);
    }

    #[test]
    fn stats_arithmetic() {
        let s = TimingStats::from_samples(&[0.002, 0.004]).unwrap();
        assert!((s.avg_s - 0.003).abs() < 1e-15);
        assert_eq!((s.min_s, s.max_s, s.count), (0.002, 0.004, 2));
        let s = TimingStats::from_samples(&[0.7]).unwrap();
        assert_eq!((s.avg_s, s.min_s, s.max_s), (0.7, 0.7, 0.7));
    }
}
