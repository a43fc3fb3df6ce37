//! Closed-loop simulation of quadcopters flying their planned routes.

use std::io::{self, Write};

use nalgebra::Vector3;
use thiserror::Error;

use crate::config::{ConfigError, KvConfig};
use crate::control::{attitude_control, mix_plus, position_control, ControlGains, ControllerState};
use crate::dynamics::{step, QuadParams, QuadState};
use crate::par::{self, Parallelism};
use crate::routes::{QuadRoute, RoutePlan};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlightSettings {
    pub dt: f64,
    /// Waypoints and the start hover sit at this height (m).
    pub cruise_altitude: f64,
    pub capture_radius: f64,
    /// Hover time at the start before the first waypoint is released (s).
    pub warmup: f64,
    /// Simulated time cap (s).
    pub max_time: f64,
    /// A position farther than this from the origin counts as divergence (m).
    pub divergence_radius: f64,
}

impl Default for FlightSettings {
    fn default() -> Self {
        Self::from_config(&crate::config::default_quad_config()).expect("shipped settings are valid")
    }
}

impl FlightSettings {
    pub fn from_config(cfg: &KvConfig) -> Result<Self, ConfigError> {
        let s = Self {
            dt: cfg.get("dt")?,
            cruise_altitude: cfg.get("cruise_altitude")?,
            capture_radius: cfg.get("capture_radius")?,
            warmup: cfg.get("warmup")?,
            max_time: cfg.get("max_time")?,
            divergence_radius: cfg.get("divergence_radius")?,
        };
        let positive = [
            ("dt", s.dt),
            ("capture_radius", s.capture_radius),
            ("max_time", s.max_time),
            ("divergence_radius", s.divergence_radius),
        ];
        for (key, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(ConfigError::Invalid {
                    key: key.into(),
                    reason: "must be positive".into(),
                });
            }
        }
        if !(s.warmup >= 0.0 && s.cruise_altitude.is_finite()) {
            return Err(ConfigError::Invalid {
                key: "warmup".into(),
                reason: "must be non-negative".into(),
            });
        }
        Ok(s)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum FlightError {
    #[error("quadcopter {quad}: simulation diverged at t = {time:.3} s ({reason})")]
    DivergenceDetected { quad: String, time: f64, reason: String },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub time: f64,
    pub state: QuadState,
    /// Rotor speeds applied from this sample until the next.
    pub speeds: [f64; 4],
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub quad: String,
    pub samples: Vec<Sample>,
    pub waypoints: Vec<Vector3<f64>>,
    /// Capture time of each waypoint reached, in order.
    pub captures: Vec<f64>,
    /// Steps on which the mixer had to clamp rotor speeds.
    pub saturated_steps: usize,
}

pub const CSV_HEADER: &str = "t,x,y,z,vx,vy,vz,phi,theta,psi,wx,wy,wz,m1,m2,m3,m4";

impl Trajectory {
    pub fn completed(&self) -> bool {
        self.captures.len() == self.waypoints.len()
    }

    pub fn final_state(&self) -> &QuadState {
        &self.samples.last().expect("trajectories are never empty").state
    }

    pub fn write_csv(&self, mut out: impl Write) -> io::Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        for s in &self.samples {
            write!(out, "{}", s.time)?;
            for v in s.state.to_array().iter().chain(&s.speeds) {
                write!(out, ",{v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Flies one route: hover at the start for the warmup, then chase each leg's
/// destination until it is within the capture radius.
pub fn fly_route(
    route: &QuadRoute,
    params: &QuadParams,
    gains: &ControlGains,
    settings: &FlightSettings,
) -> Result<Trajectory, FlightError> {
    let alt = settings.cruise_altitude;
    let lift = |p: [f64; 2]| Vector3::new(p[0], p[1], alt);
    let waypoints: Vec<Vector3<f64>> = route.legs.iter().map(|l| lift(l.to_position)).collect();
    let start = lift(route.start_position);
    let dt = settings.dt;
    let warmup_steps = (settings.warmup / dt).round() as usize;
    let max_steps = (settings.max_time / dt).ceil() as usize;
    let mut traj = Trajectory {
        quad: route.quad.clone(),
        samples: Vec::with_capacity(warmup_steps + 1),
        waypoints,
        captures: Vec::new(),
        saturated_steps: 0,
    };
    let diverged = |time: f64, reason: String| FlightError::DivergenceDetected {
        quad: route.quad.clone(),
        time,
        reason,
    };
    let mut state = QuadState::at_rest(start);
    let mut ctrl = ControllerState::default();
    let mut target = 0;
    let mut k = 0;
    loop {
        let time = k as f64 * dt;
        if k >= warmup_steps
            && target < traj.waypoints.len()
            && (state.position - traj.waypoints[target]).norm() < settings.capture_radius
        {
            traj.captures.push(time);
            target += 1;
            ctrl.reset_position();
        }
        let done = k >= warmup_steps && target == traj.waypoints.len();
        if done || k >= max_steps {
            traj.samples.push(Sample {
                time,
                state,
                speeds: [0.0; 4],
            });
            return Ok(traj);
        }
        let goal = if k < warmup_steps { start } else { traj.waypoints[target] };
        let (setpoint, thrust) = position_control(&state, &goal, 0.0, gains, params, &mut ctrl, dt);
        let torque = attitude_control(&state, &setpoint, gains, &mut ctrl, dt);
        let speeds = match mix_plus(thrust, &torque, params) {
            Ok(s) => s,
            Err(e) => {
                traj.saturated_steps += 1;
                e.clamped
            }
        };
        traj.samples.push(Sample { time, state, speeds });
        state = step(&state, &speeds, dt, params).map_err(|e| diverged(time, e.to_string()))?;
        if !state.is_finite() {
            return Err(diverged(time, "non-finite state".into()));
        }
        if state.position.norm() > settings.divergence_radius {
            return Err(diverged(time, format!("left the {} m safety sphere", settings.divergence_radius)));
        }
        k += 1;
    }
}

/// Flies every route of `plan`; simulations are independent.
pub fn fly_plan(
    plan: &RoutePlan,
    params: &QuadParams,
    gains: &ControlGains,
    settings: &FlightSettings,
    mode: Parallelism,
) -> Result<Vec<Trajectory>, FlightError> {
    par::map(mode, &plan.routes, |r| fly_route(r, params, gains, settings))
        .into_iter()
        .collect()
}
