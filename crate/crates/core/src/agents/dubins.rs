//! Dubins car and Dubins plane with proportional waypoint tracking.
//!
//! Car state: `[x, y, theta, v]`. Plane state: `[x, y, z, theta, gamma, v]`.
//! Heading rate is `k_theta * wrap(bearing - theta)`, saturated at
//! `omega_max`. Speed tracks a mode-dependent target: UNTRUSTED accelerates
//! toward `v_max` (never braking), SAFETY decelerates toward `v_safe` (never
//! accelerating), NORMAL tracks `v_cruise` if set and otherwise holds speed.
//! The plane adds `z' = v sin(gamma)`; its flight-path angle tracks the
//! climb angle to the goal, or `pitch_up` while in SAFETY.

use super::{check_step_args, AgentError, AgentModel, Goal, Kinematics, Mode, ModelKind};
use crate::scalar::{clamp, wrap_angle, Scalar};
use crate::scenario::ExecutionTrace;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DubinsCarParams<T> {
    pub k_theta: T,
    pub k_v: T,
    pub a_max: T,
    pub omega_max: T,
    pub v_max: T,
    pub v_safe: T,
    pub v_cruise: Option<T>,
}

impl<T: Scalar> Default for DubinsCarParams<T> {
    fn default() -> Self {
        DubinsCarParams {
            k_theta: T::lit(1.0),
            k_v: T::lit(1.0),
            a_max: T::lit(3.0),
            omega_max: T::lit(1.0),
            v_max: T::lit(10.0),
            v_safe: T::zero(),
            v_cruise: None,
        }
    }
}

fn require_positive<T: Scalar>(name: &'static str, v: T) -> Result<(), AgentError> {
    if v > T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(AgentError::InvalidParam {
            name,
            reason: format!("must be positive and finite, got {v}"),
        })
    }
}

fn require_speed<T: Scalar>(name: &'static str, v: T, v_max: T) -> Result<(), AgentError> {
    if v >= T::zero() && v <= v_max {
        Ok(())
    } else {
        Err(AgentError::InvalidParam {
            name,
            reason: format!("must lie in [0, v_max], got {v}"),
        })
    }
}

impl<T: Scalar> DubinsCarParams<T> {
    pub fn validate(&self) -> Result<(), AgentError> {
        require_positive("k_theta", self.k_theta)?;
        require_positive("k_v", self.k_v)?;
        require_positive("a_max", self.a_max)?;
        require_positive("omega_max", self.omega_max)?;
        require_positive("v_max", self.v_max)?;
        require_speed("v_safe", self.v_safe, self.v_max)?;
        if let Some(vc) = self.v_cruise {
            require_speed("v_cruise", vc, self.v_max)?;
        }
        Ok(())
    }

    fn acceleration(&self, mode: Mode, v: T) -> T {
        match mode {
            Mode::Untrusted => clamp(self.k_v * (self.v_max - v), T::zero(), self.a_max),
            Mode::Safety => clamp(self.k_v * (self.v_safe - v), -self.a_max, T::zero()),
            Mode::Normal => self
                .v_cruise
                .map(|vc| clamp(self.k_v * (vc - v), -self.a_max, self.a_max))
                .unwrap_or(T::zero()),
        }
    }

    fn turn_rate(&self, x: T, y: T, theta: T, goal: Option<&[T]>) -> T {
        match goal {
            Some([gx, gy, ..]) => {
                let (dx, dy) = (*gx - x, *gy - y);
                if dx == T::zero() && dy == T::zero() {
                    return T::zero();
                }
                let err = wrap_angle(dy.atan2(dx) - theta);
                clamp(self.k_theta * err, -self.omega_max, self.omega_max)
            }
            _ => T::zero(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DubinsCarState<T> {
    pub x: T,
    pub y: T,
    pub theta: T,
    pub v: T,
}

/// `goal` is a workspace point `[gx, gy]`; with no goal the car drives straight.
pub fn dubins_car_step<T: Scalar>(
    mode: Mode,
    s: DubinsCarState<T>,
    dt: T,
    goal: Option<&[T]>,
    params: &DubinsCarParams<T>,
) -> Result<DubinsCarState<T>, AgentError> {
    if !(dt > T::zero()) {
        return Err(AgentError::NonPositiveDt(dt.to_f64_lossy()));
    }
    let omega = params.turn_rate(s.x, s.y, s.theta, goal);
    let a = params.acceleration(mode, s.v);
    Ok(DubinsCarState {
        x: s.x + s.v * s.theta.cos() * dt,
        y: s.y + s.v * s.theta.sin() * dt,
        theta: wrap_angle(s.theta + omega * dt),
        v: clamp(s.v + a * dt, T::zero(), params.v_max),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DubinsPlaneParams<T> {
    pub car: DubinsCarParams<T>,
    pub k_gamma: T,
    /// Bound on the commanded flight-path angle when tracking a goal.
    pub gamma_max: T,
    /// Flight-path angle commanded in SAFETY.
    pub pitch_up: T,
}

impl<T: Scalar> Default for DubinsPlaneParams<T> {
    fn default() -> Self {
        DubinsPlaneParams {
            car: DubinsCarParams {
                v_safe: T::lit(5.0),
                ..DubinsCarParams::default()
            },
            k_gamma: T::lit(2.0),
            gamma_max: T::lit(0.5),
            pitch_up: T::lit(0.3),
        }
    }
}

impl<T: Scalar> DubinsPlaneParams<T> {
    pub fn validate(&self) -> Result<(), AgentError> {
        self.car.validate()?;
        require_positive("k_gamma", self.k_gamma)?;
        require_positive("gamma_max", self.gamma_max)?;
        let half_pi = T::lit(std::f64::consts::FRAC_PI_2);
        if !(self.pitch_up > T::zero() && self.pitch_up < half_pi) {
            return Err(AgentError::InvalidParam {
                name: "pitch_up",
                reason: format!("must lie in (0, pi/2), got {}", self.pitch_up),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DubinsPlaneState<T> {
    pub x: T,
    pub y: T,
    pub z: T,
    pub theta: T,
    pub gamma: T,
    pub v: T,
}

/// `goal` is `[gx, gy]` or `[gx, gy, gz]`; altitude tracking needs the third entry.
pub fn dubins_plane_step<T: Scalar>(
    mode: Mode,
    s: DubinsPlaneState<T>,
    dt: T,
    goal: Option<&[T]>,
    params: &DubinsPlaneParams<T>,
) -> Result<DubinsPlaneState<T>, AgentError> {
    if !(dt > T::zero()) {
        return Err(AgentError::NonPositiveDt(dt.to_f64_lossy()));
    }
    let car = &params.car;
    let omega = car.turn_rate(s.x, s.y, s.theta, goal);
    let a = car.acceleration(mode, s.v);
    let gamma_target = match (mode, goal) {
        (Mode::Safety, _) => Some(params.pitch_up),
        (_, Some([gx, gy, gz, ..])) => {
            let horizontal = (*gx - s.x).hypot(*gy - s.y);
            let climb = (*gz - s.z).atan2(horizontal);
            Some(clamp(climb, -params.gamma_max, params.gamma_max))
        }
        _ => None,
    };
    let gamma_rate = gamma_target
        .map(|g| params.k_gamma * (g - s.gamma))
        .unwrap_or(T::zero());
    Ok(DubinsPlaneState {
        x: s.x + s.v * s.theta.cos() * dt,
        y: s.y + s.v * s.theta.sin() * dt,
        z: s.z + s.v * s.gamma.sin() * dt,
        theta: wrap_angle(s.theta + omega * dt),
        gamma: wrap_angle(s.gamma + gamma_rate * dt),
        v: clamp(s.v + a * dt, T::zero(), car.v_max),
    })
}

#[derive(Debug, Clone)]
pub struct DubinsCarAgent {
    pub id: String,
    pub params: DubinsCarParams<f64>,
    pub goal: Goal,
}

impl DubinsCarAgent {
    pub fn new(id: impl Into<String>, params: DubinsCarParams<f64>, goal: Goal) -> Result<Self, AgentError> {
        params.validate()?;
        Ok(DubinsCarAgent {
            id: id.into(),
            params,
            goal,
        })
    }
}

impl AgentModel for DubinsCarAgent {
    fn id(&self) -> &str {
        &self.id
    }

    fn state_dim(&self) -> usize {
        4
    }

    fn kinematics(&self) -> Kinematics {
        ModelKind::DubinsCar.kinematics()
    }

    fn step(&self, mode: Mode, state: &[f64], dt: f64, trace: &ExecutionTrace) -> Result<Vec<f64>, AgentError> {
        check_step_args(dt, state, 4)?;
        let goal = self.goal.resolve(trace)?;
        let s = DubinsCarState {
            x: state[0],
            y: state[1],
            theta: state[2],
            v: state[3],
        };
        let n = dubins_car_step(mode, s, dt, goal.as_deref(), &self.params)?;
        Ok(vec![n.x, n.y, n.theta, n.v])
    }
}

#[derive(Debug, Clone)]
pub struct DubinsPlaneAgent {
    pub id: String,
    pub params: DubinsPlaneParams<f64>,
    pub goal: Goal,
}

impl DubinsPlaneAgent {
    pub fn new(id: impl Into<String>, params: DubinsPlaneParams<f64>, goal: Goal) -> Result<Self, AgentError> {
        params.validate()?;
        Ok(DubinsPlaneAgent {
            id: id.into(),
            params,
            goal,
        })
    }
}

impl AgentModel for DubinsPlaneAgent {
    fn id(&self) -> &str {
        &self.id
    }

    fn state_dim(&self) -> usize {
        6
    }

    fn kinematics(&self) -> Kinematics {
        ModelKind::DubinsPlane.kinematics()
    }

    fn step(&self, mode: Mode, state: &[f64], dt: f64, trace: &ExecutionTrace) -> Result<Vec<f64>, AgentError> {
        check_step_args(dt, state, 6)?;
        let goal = self.goal.resolve(trace)?;
        let s = DubinsPlaneState {
            x: state[0],
            y: state[1],
            z: state[2],
            theta: state[3],
            gamma: state[4],
            v: state[5],
        };
        let n = dubins_plane_step(mode, s, dt, goal.as_deref(), &self.params)?;
        Ok(vec![n.x, n.y, n.z, n.theta, n.gamma, n.v])
    }
}
