use std::fmt::Write as _;
use std::thread;

use indexmap::IndexMap;
use serde::Serialize;

use super::metrics::{controller_usage, distance_series, ttc_series, ControllerUsage, Series};
use super::{Collector, EvalError, EvalMeta, TimingStats};
use crate::agents::Mode;
use crate::scenario::ExecutionTrace;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgentReport {
    /// Decision-time statistics; `None` when no decisions were timed.
    pub timing: Option<TimingStats>,
    /// `None` when the agent has no mode decisions.
    pub usage: Option<ControllerUsage>,
    pub unsafe_distance: IndexMap<String, Series>,
    pub agent_distance: IndexMap<String, Series>,
    pub min_unsafe_distance: IndexMap<String, f64>,
    pub min_agent_distance: IndexMap<String, f64>,
    /// Serialized with `null` for "never".
    pub ttc: IndexMap<String, Series>,
    pub min_ttc: IndexMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub samples: usize,
    pub start: Option<f64>,
    pub end: Option<f64>,
    pub agents: IndexMap<String, AgentReport>,
}

fn minimum(s: &Series) -> f64 {
    s.iter().map(|x| x.1).fold(f64::INFINITY, f64::min)
}

fn agent_report(
    trace: &ExecutionTrace,
    id: &str,
    timing: Option<TimingStats>,
    meta: &EvalMeta,
) -> Result<AgentReport, EvalError> {
    let mut r = AgentReport {
        timing,
        usage: controller_usage(trace, id)?,
        unsafe_distance: IndexMap::new(),
        agent_distance: IndexMap::new(),
        min_unsafe_distance: IndexMap::new(),
        min_agent_distance: IndexMap::new(),
        ttc: IndexMap::new(),
        min_ttc: IndexMap::new(),
    };
    // sets attached to the agent itself are not obstacles for it
    let sets = trace.unsafe_sets.keys().filter(|s| meta.anchor_of(s) != Some(id));
    for set in sets {
        let d = distance_series(trace, id, set, meta)?;
        r.min_unsafe_distance.insert(set.clone(), minimum(&d));
        r.unsafe_distance.insert(set.clone(), d);
    }
    for other in trace.agents.keys().filter(|o| o.as_str() != id) {
        let d = distance_series(trace, id, other, meta)?;
        r.min_agent_distance.insert(other.clone(), minimum(&d));
        r.agent_distance.insert(other.clone(), d);
    }
    let targets: Vec<String> = r
        .unsafe_distance
        .keys()
        .chain(r.agent_distance.keys())
        .cloned()
        .collect();
    for target in targets {
        let s = ttc_series(trace, id, &target, meta)?;
        r.min_ttc.insert(target.clone(), minimum(&s));
        r.ttc.insert(target, s);
    }
    Ok(r)
}

/// Evaluates every agent of `trace`; `timings` holds decision durations by
/// agent id. Agents are processed in parallel, the result does not depend
/// on scheduling.
pub fn evaluate(
    trace: &ExecutionTrace,
    timings: &IndexMap<String, Vec<f64>>,
    meta: &EvalMeta,
) -> Result<EvalReport, EvalError> {
    let times = trace.times();
    let reports: Vec<Result<AgentReport, EvalError>> = thread::scope(|scope| {
        let handles: Vec<_> = trace
            .agents
            .keys()
            .map(|id| {
                let timing = timings.get(id).and_then(|d| TimingStats::from_samples(d));
                scope.spawn(move || agent_report(trace, id, timing, meta))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("evaluation thread panicked"))
            .collect()
    });
    let mut agents = IndexMap::new();
    for (id, r) in trace.agents.keys().zip(reports) {
        agents.insert(id.clone(), r?);
    }
    Ok(EvalReport {
        samples: times.len(),
        start: times.first().copied(),
        end: times.last().copied(),
        agents,
    })
}

/// Report over everything `collector` has seen; its timings are attributed
/// to its ego. An empty collector yields a report with no agents.
pub fn summary(collector: &Collector, meta: &EvalMeta) -> Result<EvalReport, EvalError> {
    let mut timings = IndexMap::new();
    timings.insert(collector.ego().to_string(), collector.durations().to_vec());
    evaluate(collector.trace(), &timings, meta)
}

fn fmt_value(x: f64) -> String {
    if x.is_infinite() {
        "inf".into()
    } else {
        format!("{x:.6}")
    }
}

impl EvalReport {
    pub fn is_empty(&self) -> bool {
        self.samples == 0
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if self.is_empty() {
            out.push_str("no data\n");
            return out;
        }
        let _ = writeln!(
            out,
            "samples: {} (t = {} .. {})",
            self.samples,
            self.start.unwrap_or(0.0),
            self.end.unwrap_or(0.0)
        );
        for (id, a) in &self.agents {
            let _ = writeln!(out, "\n[{id}]");
            match &a.timing {
                Some(t) => {
                    let _ = writeln!(
                        out,
                        "  decision time: avg {:.4} ms, min {:.4} ms, max {:.4} ms ({} samples)",
                        t.avg_s * 1e3,
                        t.min_s * 1e3,
                        t.max_s * 1e3,
                        t.count
                    );
                }
                None => out.push_str("  decision time: no data\n"),
            }
            match &a.usage {
                Some(u) => {
                    let parts: Vec<String> = Mode::ALL
                        .iter()
                        .map(|m| format!("{m} {:.2}%", u.percent[m]))
                        .collect();
                    let _ = writeln!(
                        out,
                        "  controller usage: {} ({} switches over {} decisions)",
                        parts.join(", "),
                        u.switches,
                        u.decisions
                    );
                }
                None => out.push_str("  controller usage: no data\n"),
            }
            for (set, d) in &a.min_unsafe_distance {
                let _ = writeln!(out, "  min distance to unsafe set {set}: {}", fmt_value(*d));
            }
            for (other, d) in &a.min_agent_distance {
                let _ = writeln!(out, "  min distance to agent {other}: {}", fmt_value(*d));
            }
            for (target, t) in &a.min_ttc {
                let _ = writeln!(out, "  min TTC to {target}: {}", fmt_value(*t));
            }
        }
        out
    }
}
