use indexmap::IndexMap;
use serde::Serialize;

use super::{EvalError, EvalMeta};
use crate::agents::{Kinematics, Mode};
use crate::geometry::SetDef;
use crate::scenario::{AgentTrace, ExecutionTrace, UnsafeTrace};

/// `(t, value)` pairs.
pub type Series = Vec<(f64, f64)>;

enum Target<'a> {
    Agent(&'a AgentTrace, &'a Kinematics),
    Set(&'a UnsafeTrace),
}

fn agent<'a>(trace: &'a ExecutionTrace, id: &str) -> Result<&'a AgentTrace, EvalError> {
    trace.agent(id).ok_or_else(|| EvalError::UnknownId(id.to_string()))
}

fn target<'a>(trace: &'a ExecutionTrace, id: &str, meta: &'a EvalMeta) -> Result<Target<'a>, EvalError> {
    if let Some(a) = trace.agent(id) {
        return Ok(Target::Agent(a, meta.kinematics_of(id)?));
    }
    trace
        .unsafe_sets
        .get(id)
        .map(Target::Set)
        .ok_or_else(|| EvalError::UnknownId(id.to_string()))
}

fn position(a: &AgentTrace, kin: &Kinematics, k: usize, id: &str) -> Result<Vec<f64>, EvalError> {
    kin.position_of(&a.state_trace[k].state)
        .ok_or_else(|| EvalError::Position(id.to_string()))
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Distance from `agent_id` to an unsafe set or another agent at every
/// recorded timestamp.
pub fn distance_series(
    trace: &ExecutionTrace,
    agent_id: &str,
    target_id: &str,
    meta: &EvalMeta,
) -> Result<Series, EvalError> {
    let a = agent(trace, agent_id)?;
    let kin = meta.kinematics_of(agent_id)?;
    let tgt = target(trace, target_id, meta)?;
    (0..a.state_trace.len())
        .map(|k| {
            let p = position(a, kin, k, agent_id)?;
            let d = match &tgt {
                Target::Agent(b, bk) => euclid(&p, &position(b, bk, k, target_id)?),
                Target::Set(u) => u.state_trace[k].def.distance(&p)?,
            };
            Ok((a.state_trace[k].t, d))
        })
        .collect()
}

/// Finite-difference rate of change of `values`, backward where possible.
fn difference(times: &[f64], values: &[Vec<f64>], k: usize) -> Vec<f64> {
    let (i, j) = match values.len() {
        0 | 1 => return vec![0.0; values.first().map_or(0, Vec::len)],
        _ if k == 0 => (0, 1),
        _ => (k - 1, k),
    };
    let h = times[j] - times[i];
    values[j].iter().zip(&values[i]).map(|(b, a)| (b - a) / h).collect()
}

fn agent_velocity(a: &AgentTrace, kin: &Kinematics, k: usize, id: &str) -> Result<Vec<f64>, EvalError> {
    if let Some(v) = kin.velocity_of(&a.state_trace[k].state) {
        return Ok(v);
    }
    let lo = k.saturating_sub(1);
    let hi = (lo + 1).min(a.state_trace.len() - 1);
    let pts = [position(a, kin, lo, id)?, position(a, kin, hi, id)?];
    let times = [a.state_trace[lo].t, a.state_trace[hi].t];
    Ok(if hi == lo {
        vec![0.0; pts[0].len()]
    } else {
        difference(&times, &pts, 1)
    })
}

/// Least-squares `u` with `A u = db`; zero when `A^T A` is singular.
fn translation_from_offsets(a: &[Vec<f64>], db: &[f64]) -> Vec<f64> {
    let n = a.first().map_or(0, Vec::len);
    let mut m = vec![vec![0.0; n + 1]; n];
    for (row, d) in a.iter().zip(db) {
        for i in 0..n {
            for j in 0..n {
                m[i][j] += row[i] * row[j];
            }
            m[i][n] += row[i] * d;
        }
    }
    for c in 0..n {
        let pivot = (c..n)
            .max_by(|&x, &y| m[x][c].abs().total_cmp(&m[y][c].abs()))
            .expect("nonempty range");
        if m[pivot][c].abs() < 1e-12 {
            return vec![0.0; n];
        }
        m.swap(c, pivot);
        for r in 0..n {
            if r != c {
                let f = m[r][c] / m[c][c];
                for j in c..=n {
                    m[r][j] -= f * m[c][j];
                }
            }
        }
    }
    (0..n).map(|i| m[i][n] / m[i][i]).collect()
}

/// Velocity of a set's motion, from the change of its definition around
/// sample `k`.
fn set_velocity(u: &UnsafeTrace, k: usize) -> Vec<f64> {
    let times: Vec<f64> = u.state_trace.iter().map(|s| s.t).collect();
    match &u.state_trace[k].def {
        SetDef::Polytope(p) => {
            if u.state_trace.len() < 2 {
                return vec![0.0; p.dim()];
            }
            let (i, j) = if k == 0 { (0, 1) } else { (k - 1, k) };
            let prev = match &u.state_trace[i].def {
                SetDef::Polytope(q) => q.offsets(),
                _ => return vec![0.0; p.dim()],
            };
            let next = match &u.state_trace[j].def {
                SetDef::Polytope(q) => q.offsets(),
                _ => return vec![0.0; p.dim()],
            };
            let h = times[j] - times[i];
            let db: Vec<f64> = next.iter().zip(prev).map(|(b, a)| (b - a) / h).collect();
            translation_from_offsets(p.rows(), &db)
        }
        _ => {
            let refs: Vec<Vec<f64>> = u.state_trace.iter().map(|s| s.def.reference_point()).collect();
            difference(&times, &refs, k)
        }
    }
}

/// Smallest `tau >= 0` with `|d + w tau| <= r`, or infinity.
pub(crate) fn first_contact(d: &[f64], w: &[f64], r: f64) -> f64 {
    let c = d.iter().map(|x| x * x).sum::<f64>() - r * r;
    if c <= 0.0 {
        return 0.0;
    }
    let a: f64 = w.iter().map(|x| x * x).sum();
    let b: f64 = 2.0 * d.iter().zip(w).map(|(x, y)| x * y).sum::<f64>();
    if a == 0.0 || b >= 0.0 {
        return f64::INFINITY;
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return f64::INFINITY;
    }
    // smaller root via the cancellation-free form c / q
    let q = 0.5 * (-b + disc.sqrt());
    c / q
}

fn grid_step(trace: &ExecutionTrace) -> f64 {
    let times = trace.times();
    match times.as_slice() {
        [a, b, ..] => b - a,
        _ => 0.1,
    }
}

/// Parameter range where `p + v tau` satisfies `row . x <= b` for every
/// row of a box or polytope, widened slightly; `None` when it misses.
fn line_interval(set: &SetDef<f64>, p: &[f64], v: &[f64]) -> Option<(f64, f64)> {
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    match set {
        SetDef::Hyperrectangle { lower, upper } => {
            for i in 0..p.len() {
                let mut e = vec![0.0; p.len()];
                e[i] = 1.0;
                rows.push((e.clone(), upper[i]));
                e[i] = -1.0;
                rows.push((e, -lower[i]));
            }
        }
        SetDef::Polytope(poly) => {
            rows.extend(poly.rows().iter().cloned().zip(poly.offsets().iter().copied()));
        }
        _ => return Some((0.0, f64::INFINITY)),
    }
    let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
    for (row, b) in rows {
        let slack = b - row.iter().zip(p).map(|(x, y)| x * y).sum::<f64>();
        let rate = row.iter().zip(v).map(|(x, y)| x * y).sum::<f64>();
        let tol = 1e-9 * (1.0 + b.abs());
        if rate.abs() <= 1e-15 {
            if slack < -tol {
                return None;
            }
        } else if rate > 0.0 {
            hi = hi.min((slack + tol) / rate);
        } else {
            lo = lo.max((slack - tol) / rate);
        }
    }
    (lo <= hi).then_some((lo, hi))
}

/// First entry time into a fixed convex set for `p + v tau`, found by
/// stepping at `h` and bisecting the bracketing step.
fn stepped_contact(set: &SetDef<f64>, p: &[f64], v: &[f64], h: f64, horizon: f64) -> Result<f64, EvalError> {
    let at = |tau: f64| -> Vec<f64> { p.iter().zip(v).map(|(x, y)| x + y * tau).collect() };
    if set.contains(p)? {
        return Ok(0.0);
    }
    if v.iter().all(|x| *x == 0.0) {
        return Ok(f64::INFINITY);
    }
    // the line meets a convex set in one interval; stepping starts just before it
    let Some((lo, _)) = line_interval(set, p, v) else {
        return Ok(f64::INFINITY);
    };
    let steps = (horizon / h).ceil() as usize;
    let first = ((lo / h).floor() as usize).saturating_sub(1).max(1);
    let mut prev = (first - 1) as f64 * h;
    for j in first..=steps {
        let tau = j as f64 * h;
        if set.contains(&at(tau))? {
            let (mut lo, mut hi) = (prev, tau);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if set.contains(&at(mid))? {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(hi);
        }
        prev = tau;
    }
    Ok(f64::INFINITY)
}

fn grid_index(trace: &ExecutionTrace, t: f64) -> Result<usize, EvalError> {
    let times = trace.times();
    let slack = 1e-9 * t.abs().max(1.0);
    let k = times.partition_point(|&x| x < t - slack);
    match times.get(k) {
        Some(&x) if (x - t).abs() <= slack => Ok(k),
        _ => Err(EvalError::OffGrid(t)),
    }
}

fn ttc_at(
    trace: &ExecutionTrace,
    agent_id: &str,
    target_id: &str,
    k: usize,
    meta: &EvalMeta,
) -> Result<f64, EvalError> {
    let a = agent(trace, agent_id)?;
    let kin = meta.kinematics_of(agent_id)?;
    let p = position(a, kin, k, agent_id)?;
    let v = agent_velocity(a, kin, k, agent_id)?;
    let rel = |q: &[f64], u: &[f64]| -> (Vec<f64>, Vec<f64>) {
        (
            q.iter().zip(&p).map(|(x, y)| x - y).collect(),
            u.iter().zip(&v).map(|(x, y)| x - y).collect(),
        )
    };
    match target(trace, target_id, meta)? {
        Target::Agent(b, bk) => {
            let (d, w) = rel(
                &position(b, bk, k, target_id)?,
                &agent_velocity(b, bk, k, target_id)?,
            );
            Ok(first_contact(&d, &w, meta.collision_radius_of(target_id)))
        }
        Target::Set(u) => {
            let def = &u.state_trace[k].def;
            let su = set_velocity(u, k);
            match def {
                SetDef::Point(q) => {
                    let (d, w) = rel(q, &su);
                    Ok(first_contact(&d, &w, 0.0))
                }
                SetDef::Ball { center, radius } => {
                    let (d, w) = rel(center, &su);
                    Ok(first_contact(&d, &w, *radius))
                }
                SetDef::Hyperrectangle { .. } | SetDef::Polytope(_) => {
                    let dt = grid_step(trace);
                    let horizon = meta
                        .ttc_horizon
                        .unwrap_or_else(|| trace.last_time().unwrap_or(0.0) - trace.times()[0])
                        .max(dt);
                    // in the set's frame the agent moves at v - su
                    let w: Vec<f64> = v.iter().zip(&su).map(|(x, y)| x - y).collect();
                    stepped_contact(def, &p, &w, dt / 10.0, horizon)
                }
            }
        }
    }
}

/// Time until `agent_id` and `target_id` meet if both keep their velocity
/// at time `t`; infinity if they never do.
pub fn ttc(
    trace: &ExecutionTrace,
    agent_id: &str,
    target_id: &str,
    t: f64,
    meta: &EvalMeta,
) -> Result<f64, EvalError> {
    let k = grid_index(trace, t)?;
    ttc_at(trace, agent_id, target_id, k, meta)
}

/// [`ttc`] at every recorded timestamp.
pub fn ttc_series(
    trace: &ExecutionTrace,
    agent_id: &str,
    target_id: &str,
    meta: &EvalMeta,
) -> Result<Series, EvalError> {
    let a = agent(trace, agent_id)?;
    (0..a.state_trace.len())
        .map(|k| Ok((a.state_trace[k].t, ttc_at(trace, agent_id, target_id, k, meta)?)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ControllerUsage {
    /// Percentage of decisions per mode; every mode is present.
    pub percent: IndexMap<Mode, f64>,
    pub switches: usize,
    pub decisions: usize,
}

/// `None` when the agent has no mode decisions.
pub fn controller_usage(trace: &ExecutionTrace, agent_id: &str) -> Result<Option<ControllerUsage>, EvalError> {
    let modes = &agent(trace, agent_id)?.mode_trace;
    if modes.is_empty() {
        return Ok(None);
    }
    let n = modes.len() as f64;
    let percent = Mode::ALL
        .iter()
        .map(|&m| (m, 100.0 * modes.iter().filter(|&&x| x == m).count() as f64 / n))
        .collect();
    Ok(Some(ControllerUsage {
        percent,
        switches: modes.windows(2).filter(|w| w[0] != w[1]).count(),
        decisions: modes.len(),
    }))
}
