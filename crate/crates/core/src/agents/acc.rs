//! One-dimensional adaptive cruise control agent.
//!
//! State is `[p, v]`. SAFETY runs the proportional follower
//! `k1 (p_goal - p) + k2 (v_goal - v)`, UNTRUSTED the bang-bang controller
//! `sign(p_goal - p) * a_max`, NORMAL applies no control. The command is
//! clamped to `a_max`, the plant is integrated with explicit Euler, and the
//! new speed is clamped to `v_max`.

use super::{check_step_args, AgentError, AgentModel, Goal, Kinematics, Mode, ModelKind};
use crate::scalar::{signum0, Scalar};
use crate::scenario::ExecutionTrace;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccParams<T> {
    pub k1: T,
    pub k2: T,
    pub a_max: T,
    pub v_max: T,
    /// Follow distance behind the leader.
    pub d: T,
    /// Collision distance, `0 < c < d`.
    pub c: T,
    /// Goal speed when the goal provider only supplies a position.
    pub v_bar: T,
}

impl<T: Scalar> Default for AccParams<T> {
    fn default() -> Self {
        AccParams {
            k1: T::lit(1.0),
            k2: T::lit(2.0),
            a_max: T::lit(10.0),
            v_max: T::lit(20.0),
            d: T::lit(10.0),
            c: T::lit(7.0),
            v_bar: T::lit(1.0),
        }
    }
}

impl<T: Scalar> AccParams<T> {
    pub fn validate(&self) -> Result<(), AgentError> {
        let positive = [
            ("k1", self.k1),
            ("k2", self.k2),
            ("a_max", self.a_max),
            ("v_max", self.v_max),
            ("d", self.d),
            ("c", self.c),
        ];
        for (name, v) in positive {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(AgentError::InvalidParam {
                    name,
                    reason: format!("must be positive and finite, got {v}"),
                });
            }
        }
        if self.c >= self.d {
            return Err(AgentError::InvalidParam {
                name: "c",
                reason: format!("collision distance {} must be below follow distance {}", self.c, self.d),
            });
        }
        if !self.v_bar.is_finite() {
            return Err(AgentError::InvalidParam {
                name: "v_bar",
                reason: "must be finite".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccState<T> {
    pub p: T,
    pub v: T,
}

/// Clamped acceleration command. `goal` is `(p_goal, v_goal)`.
pub fn acc_command<T: Scalar>(
    mode: Mode,
    state: AccState<T>,
    goal: Option<(T, T)>,
    params: &AccParams<T>,
) -> Result<T, AgentError> {
    let raw = match mode {
        Mode::Normal => T::zero(),
        Mode::Safety => {
            let (gp, gv) = goal.ok_or(AgentError::MissingGoal(mode))?;
            params.k1 * (gp - state.p) + params.k2 * (gv - state.v)
        }
        Mode::Untrusted => {
            let (gp, _) = goal.ok_or(AgentError::MissingGoal(mode))?;
            signum0(gp - state.p) * params.a_max
        }
    };
    Ok(if raw.abs() > params.a_max {
        signum0(raw) * params.a_max
    } else {
        raw
    })
}

/// Returns the next state and the acceleration that was applied.
pub fn acc_step<T: Scalar>(
    mode: Mode,
    state: AccState<T>,
    dt: T,
    goal: Option<(T, T)>,
    params: &AccParams<T>,
) -> Result<(AccState<T>, T), AgentError> {
    if !(dt > T::zero()) {
        return Err(AgentError::NonPositiveDt(dt.to_f64_lossy()));
    }
    let a = acc_command(mode, state, goal, params)?;
    let p = state.p + state.v * dt;
    let mut v = state.v + a * dt;
    if v.abs() >= params.v_max {
        v = signum0(v) * params.v_max;
    }
    Ok((AccState { p, v }, a))
}

#[derive(Debug, Clone)]
pub struct AccAgent {
    pub id: String,
    pub params: AccParams<f64>,
    pub goal: Goal,
}

impl AccAgent {
    pub fn new(id: impl Into<String>, params: AccParams<f64>) -> Result<Self, AgentError> {
        params.validate()?;
        Ok(AccAgent {
            id: id.into(),
            params,
            goal: Goal::None,
        })
    }

    /// Goal `[p_leader - d, v_leader]`.
    pub fn following(mut self, leader: impl Into<String>) -> Self {
        self.goal = Goal::Follow {
            agent: leader.into(),
            offset: vec![-self.params.d],
        };
        self
    }

    pub fn with_goal(mut self, goal: Goal) -> Self {
        self.goal = goal;
        self
    }

    fn goal_pair(&self, trace: &ExecutionTrace) -> Result<Option<(f64, f64)>, AgentError> {
        Ok(self.goal.resolve(trace)?.and_then(|g| match g.as_slice() {
            [p] => Some((*p, self.params.v_bar)),
            [p, v, ..] => Some((*p, *v)),
            [] => None,
        }))
    }
}

impl AgentModel for AccAgent {
    fn id(&self) -> &str {
        &self.id
    }

    fn state_dim(&self) -> usize {
        2
    }

    fn kinematics(&self) -> Kinematics {
        ModelKind::Acc.kinematics()
    }

    fn step(
        &self,
        mode: Mode,
        state: &[f64],
        dt: f64,
        trace: &ExecutionTrace,
    ) -> Result<Vec<f64>, AgentError> {
        check_step_args(dt, state, 2)?;
        let goal = match mode {
            Mode::Normal => None,
            _ => self.goal_pair(trace)?,
        };
        let (next, _) = acc_step(
            mode,
            AccState {
                p: state[0],
                v: state[1],
            },
            dt,
            goal,
            &self.params,
        )?;
        Ok(vec![next.p, next.v])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn st(p: f64, v: f64) -> AccState<f64> {
        AccState { p, v }
    }

    #[test]
    fn bang_bang_example() {
        let params = AccParams {
            a_max: 1.0,
            ..AccParams::default()
        };
        // leader at [5, 1], d = 10: goal error (5 - 10) - 0 = -5
        let (next, a) = acc_step(Mode::Untrusted, st(0.0, 1.0), 0.1, Some((-5.0, 1.0)), &params).unwrap();
        assert_eq!(a, -1.0);
        assert!((next.p - 0.1).abs() < 1e-15);
        assert!((next.v - 0.9).abs() < 1e-15);
    }

    #[test]
    fn safety_at_goal_applies_no_control() {
        let params = AccParams::default();
        let (next, a) = acc_step(Mode::Safety, st(-5.0, 1.0), 0.1, Some((-5.0, 1.0)), &params).unwrap();
        assert_eq!(a, 0.0);
        assert_eq!(next, st(-5.0 + 0.1, 1.0));
    }

    #[test]
    fn normal_is_constant_velocity() {
        let (next, a) = acc_step(Mode::Normal, st(5.0, 1.0), 0.1, None, &AccParams::default()).unwrap();
        assert_eq!(a, 0.0);
        assert!((next.p - 5.1).abs() < 1e-15);
        assert_eq!(next.v, 1.0);
    }

    #[test]
    fn errors() {
        let p = AccParams::default();
        assert_eq!(
            acc_step(Mode::Normal, st(0.0, 0.0), 0.0, None, &p).unwrap_err(),
            AgentError::NonPositiveDt(0.0)
        );
        assert_eq!(
            acc_step(Mode::Safety, st(0.0, 0.0), 0.1, None, &p).unwrap_err(),
            AgentError::MissingGoal(Mode::Safety)
        );
        assert!(AccParams { c: 12.0, ..p }.validate().is_err());
        assert!(AccParams { k1: 0.0, ..p }.validate().is_err());
    }

    #[test]
    fn safety_equilibrium_tracks_constant_speed_leader() {
        let p = AccParams::default();
        let dt = 0.1;
        let (mut f, mut leader) = (st(-5.0, 1.0), st(5.0, 1.0));
        for _ in 0..200 {
            let goal = (leader.p - p.d, leader.v);
            f = acc_step(Mode::Safety, f, dt, Some(goal), &p).unwrap().0;
            leader = acc_step(Mode::Normal, leader, dt, None, &p).unwrap().0;
            assert!(((leader.p - p.d) - f.p).abs() < 1e-9);
            assert!((f.v - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn f32_kernel() {
        let params = AccParams::<f32> {
            a_max: 1.0,
            ..AccParams::default()
        };
        let (next, _) = acc_step(
            Mode::Untrusted,
            AccState { p: 0.0f32, v: 1.0 },
            0.1,
            Some((-5.0, 1.0)),
            &params,
        )
        .unwrap();
        assert!((next.v - 0.9).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn command_and_speed_bounds(
            p in -100.0f64..100.0, v in -30.0f64..30.0,
            gp in -100.0f64..100.0, gv in -5.0f64..5.0,
            mode in prop::sample::select(Mode::ALL.to_vec()),
            dt in 0.01f64..0.5,
        ) {
            let params = AccParams::default();
            let (next, a) = acc_step(mode, st(p, v), dt, Some((gp, gv)), &params).unwrap();
            prop_assert!(a.abs() <= params.a_max);
            prop_assert!(next.v.abs() <= params.v_max);
            if mode == Mode::Untrusted && gp != p {
                prop_assert_eq!(a.abs(), params.a_max);
            }
            let again = acc_step(mode, st(p, v), dt, Some((gp, gv)), &params).unwrap();
            prop_assert_eq!(again, (next, a));
        }
    }
}
