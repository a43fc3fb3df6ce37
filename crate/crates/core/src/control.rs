//! Cascaded PID control and plus-configuration mixing.
//!
//! The position loop turns waypoint errors into acceleration demands, which
//! become a collective thrust and small-angle roll/pitch setpoints. The
//! attitude loop turns angle errors into body torques, and the mixer solves
//! for the four rotor speeds.

use nalgebra::Vector3;
use thiserror::Error;

use crate::config::{ConfigError, KvConfig};
use crate::dynamics::{QuadParams, QuadState, Torque, BACK, FRONT, LEFT, RIGHT};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    /// The accumulator stays within ±this.
    pub integral_limit: f64,
    /// The output stays within ±this.
    pub output_limit: f64,
}

impl PidGains {
    pub fn proportional(kp: f64) -> Self {
        Self {
            kp,
            ki: 0.0,
            kd: 0.0,
            integral_limit: f64::INFINITY,
            output_limit: f64::INFINITY,
        }
    }

    fn from_config(cfg: &KvConfig, prefix: &str) -> Result<Self, ConfigError> {
        let key = |k: &str| format!("{prefix}.{k}");
        let g = Self {
            kp: cfg.get(&key("kp"))?,
            ki: cfg.get_or(&key("ki"), 0.0)?,
            kd: cfg.get_or(&key("kd"), 0.0)?,
            integral_limit: cfg.get_or(&key("integral_limit"), f64::INFINITY)?,
            output_limit: cfg.get_or(&key("output_limit"), f64::INFINITY)?,
        };
        g.validate().map_err(|reason| ConfigError::Invalid {
            key: prefix.to_string(),
            reason,
        })?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), String> {
        let gains = [self.kp, self.ki, self.kd];
        if gains.iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
            return Err("gains must be finite and non-negative".into());
        }
        if !(self.integral_limit > 0.0 && self.output_limit > 0.0) {
            return Err("clamp limits must be positive".into());
        }
        Ok(())
    }
}

/// Memory of one PID channel.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PidState {
    pub integral: f64,
    /// `None` until the first update; the derivative term is zero then.
    pub prev_error: Option<f64>,
}

/// One PID step: trapezoidal integral with clamping, derivative on error.
pub fn pid_update(state: PidState, gains: &PidGains, error: f64, dt: f64) -> (f64, PidState) {
    debug_assert!(dt > 0.0);
    let prev = state.prev_error.unwrap_or(error);
    let integral = (state.integral + 0.5 * (error + prev) * dt).clamp(-gains.integral_limit, gains.integral_limit);
    let derivative = (error - prev) / dt;
    let raw = gains.kp * error + gains.ki * integral + gains.kd * derivative;
    let output = raw.clamp(-gains.output_limit, gains.output_limit);
    (
        output,
        PidState {
            integral,
            prev_error: Some(error),
        },
    )
}

/// Per-axis memory for the whole cascade.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ControllerState {
    pub x: PidState,
    pub y: PidState,
    pub z: PidState,
    pub roll: PidState,
    pub pitch: PidState,
    pub yaw: PidState,
}

impl ControllerState {
    /// Forgets the previous position errors so a waypoint switch does not
    /// produce a derivative kick.
    pub fn reset_position(&mut self) {
        for s in [&mut self.x, &mut self.y, &mut self.z] {
            s.prev_error = None;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ControlGains {
    pub xy: PidGains,
    pub z: PidGains,
    /// Roll and pitch setpoints stay within ±this (rad).
    pub max_tilt: f64,
    pub roll: PidGains,
    pub pitch: PidGains,
    pub yaw: PidGains,
}

impl Default for ControlGains {
    fn default() -> Self {
        Self::from_config(&crate::config::default_quad_config()).expect("shipped gains are valid")
    }
}

impl ControlGains {
    pub fn from_config(cfg: &KvConfig) -> Result<Self, ConfigError> {
        let max_tilt: f64 = cfg.get("max_tilt")?;
        if !(max_tilt > 0.0 && max_tilt < 1.5) {
            return Err(ConfigError::Invalid {
                key: "max_tilt".into(),
                reason: "must lie in (0, 1.5) rad".into(),
            });
        }
        Ok(Self {
            xy: PidGains::from_config(cfg, "position.xy")?,
            z: PidGains::from_config(cfg, "position.z")?,
            max_tilt,
            roll: PidGains::from_config(cfg, "attitude.roll")?,
            pitch: PidGains::from_config(cfg, "attitude.pitch")?,
            yaw: PidGains::from_config(cfg, "attitude.yaw")?,
        })
    }
}

/// Torques that drive the Euler angles toward `setpoint` (roll, pitch, yaw).
pub fn attitude_control(
    state: &QuadState,
    setpoint: &Vector3<f64>,
    gains: &ControlGains,
    ctrl: &mut ControllerState,
    dt: f64,
) -> Torque {
    let e = setpoint - state.attitude;
    let (roll, s) = pid_update(ctrl.roll, &gains.roll, e.x, dt);
    ctrl.roll = s;
    let (pitch, s) = pid_update(ctrl.pitch, &gains.pitch, e.y, dt);
    ctrl.pitch = s;
    let (yaw, s) = pid_update(ctrl.yaw, &gains.yaw, wrap_angle(e.z), dt);
    ctrl.yaw = s;
    Torque { roll, pitch, yaw }
}

/// Attitude setpoint and collective thrust that steer toward `waypoint`,
/// holding yaw at `yaw`.
pub fn position_control(
    state: &QuadState,
    waypoint: &Vector3<f64>,
    yaw: f64,
    gains: &ControlGains,
    params: &QuadParams,
    ctrl: &mut ControllerState,
    dt: f64,
) -> (Vector3<f64>, f64) {
    let e = waypoint - state.position;
    let (ax, s) = pid_update(ctrl.x, &gains.xy, e.x, dt);
    ctrl.x = s;
    let (ay, s) = pid_update(ctrl.y, &gains.xy, e.y, dt);
    ctrl.y = s;
    let (az, s) = pid_update(ctrl.z, &gains.z, e.z, dt);
    ctrl.z = s;

    let g = params.gravity;
    let (sy, cy) = yaw.sin_cos();
    // small-angle inverse of the thrust direction R(φ, θ, ψ)·e_z
    let pitch = ((ax * cy + ay * sy) / g).clamp(-gains.max_tilt, gains.max_tilt);
    let roll = ((ax * sy - ay * cy) / g).clamp(-gains.max_tilt, gains.max_tilt);
    let tilt = (state.attitude.x.cos() * state.attitude.y.cos()).max(0.5);
    let thrust = (params.mass * (g + az) / tilt).max(0.0);
    (Vector3::new(roll, pitch, yaw), thrust)
}

fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    (a + PI).rem_euclid(TAU) - PI
}

/// Rotor speeds were clamped to stay within the motor limits.
#[derive(Clone, Copy, Debug, Error, PartialEq)]
#[error("command needs rotor speeds outside the motor limits")]
pub struct UnreachableCommand {
    /// The closest achievable speeds after clamping.
    pub clamped: [f64; 4],
}

/// Rotor speeds (front, right, back, left) producing `thrust` and `torque`.
pub fn mix_plus(thrust: f64, torque: &Torque, params: &QuadParams) -> Result<[f64; 4], UnreachableCommand> {
    let k = params.thrust_coefficient;
    let lk = params.arm_length * k;
    let a = thrust / k;
    let d = torque.yaw / params.drag_coefficient;
    let fb = (a + d) / 2.0;
    let lr = (a - d) / 2.0;
    let mut sq = [0.0; 4];
    sq[FRONT] = (fb - torque.pitch / lk) / 2.0;
    sq[BACK] = (fb + torque.pitch / lk) / 2.0;
    sq[RIGHT] = (lr - torque.roll / lk) / 2.0;
    sq[LEFT] = (lr + torque.roll / lk) / 2.0;
    let (lo, hi) = (params.min_motor_speed.powi(2), params.max_motor_speed.powi(2));
    let mut saturated = false;
    let speeds = sq.map(|s| {
        let c = s.clamp(lo, hi);
        saturated |= c != s;
        c.sqrt()
    });
    if saturated {
        Err(UnreachableCommand { clamped: speeds })
    } else {
        Ok(speeds)
    }
}
