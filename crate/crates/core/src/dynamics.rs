//! Rigid-body quadrotor model: Euler rotational dynamics with a diagonal
//! inertia tensor, thrust along body z, Z-Y-X Euler angles and a classical
//! fourth-order Runge-Kutta step.
//!
//! World frame is z-up. Body frame: x forward (front rotor), y left, z up.

use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

use crate::config::{ConfigError, KvConfig};

/// Rotor index in the plus configuration.
pub const FRONT: usize = 0;
pub const RIGHT: usize = 1;
pub const BACK: usize = 2;
pub const LEFT: usize = 3;

#[derive(Debug, Error, PartialEq)]
pub enum DynamicsError {
    #[error("pitch {pitch} rad is too close to the Euler-angle singularity")]
    GimbalProximity { pitch: f64 },
    #[error("invalid quadrotor parameter: {0}")]
    InvalidParams(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadParams {
    pub mass: f64,
    /// Principal moments of inertia (Ixx, Iyy, Izz).
    pub inertia: Vector3<f64>,
    pub arm_length: f64,
    pub thrust_coefficient: f64,
    pub drag_coefficient: f64,
    pub gravity: f64,
    pub min_motor_speed: f64,
    pub max_motor_speed: f64,
    /// Linear velocity damping (N s/m); zero disables it.
    pub linear_drag: f64,
}

impl Default for QuadParams {
    fn default() -> Self {
        Self::from_config(&crate::config::default_quad_config()).expect("shipped params are valid")
    }
}

impl QuadParams {
    pub fn from_config(cfg: &KvConfig) -> Result<Self, ConfigError> {
        let p = Self {
            mass: cfg.get("mass")?,
            inertia: Vector3::new(
                cfg.get("inertia_xx")?,
                cfg.get("inertia_yy")?,
                cfg.get("inertia_zz")?,
            ),
            arm_length: cfg.get("arm_length")?,
            thrust_coefficient: cfg.get("thrust_coefficient")?,
            drag_coefficient: cfg.get("drag_coefficient")?,
            gravity: cfg.get_or("gravity", 9.81)?,
            min_motor_speed: cfg.get_or("min_motor_speed", 0.0)?,
            max_motor_speed: cfg.get("max_motor_speed")?,
            linear_drag: cfg.get_or("linear_drag", 0.0)?,
        };
        p.validate().map_err(|e| ConfigError::Invalid {
            key: "airframe".into(),
            reason: e.to_string(),
        })?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        let positive = [
            self.mass,
            self.inertia.x,
            self.inertia.y,
            self.inertia.z,
            self.arm_length,
            self.thrust_coefficient,
            self.drag_coefficient,
            self.gravity,
            self.max_motor_speed,
        ];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(DynamicsError::InvalidParams("all physical constants must be positive".into()));
        }
        let i = self.inertia;
        if i.x > i.y + i.z || i.y > i.x + i.z || i.z > i.x + i.y {
            return Err(DynamicsError::InvalidParams("inertias violate the triangle inequality".into()));
        }
        if self.min_motor_speed < 0.0 || self.min_motor_speed >= self.max_motor_speed {
            return Err(DynamicsError::InvalidParams("motor speed limits out of order".into()));
        }
        if self.linear_drag < 0.0 {
            return Err(DynamicsError::InvalidParams("linear drag must be non-negative".into()));
        }
        Ok(())
    }

    /// Rotor speed that balances gravity with four equal rotors.
    pub fn hover_speed(&self) -> f64 {
        (self.mass * self.gravity / (4.0 * self.thrust_coefficient)).sqrt()
    }

    pub fn hover_thrust(&self) -> f64 {
        self.mass * self.gravity
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Torque {
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
}

impl Torque {
    pub const ZERO: Torque = Torque {
        roll: 0.0,
        pitch: 0.0,
        yaw: 0.0,
    };

    pub fn as_vector(&self) -> Vector3<f64> {
        Vector3::new(self.roll, self.pitch, self.yaw)
    }
}

/// Twelve-dimensional rigid-body state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadState {
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
    /// Roll, pitch, yaw (unwrapped).
    pub attitude: Vector3<f64>,
    /// Body angular rates.
    pub body_rates: Vector3<f64>,
}

impl QuadState {
    pub fn at_rest(position: Vector3<f64>) -> Self {
        Self {
            position,
            velocity: Vector3::zeros(),
            attitude: Vector3::zeros(),
            body_rates: Vector3::zeros(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    pub fn to_array(&self) -> [f64; 12] {
        let mut out = [0.0; 12];
        out[0..3].copy_from_slice(self.position.as_slice());
        out[3..6].copy_from_slice(self.velocity.as_slice());
        out[6..9].copy_from_slice(self.attitude.as_slice());
        out[9..12].copy_from_slice(self.body_rates.as_slice());
        out
    }

    pub fn from_array(a: &[f64; 12]) -> Self {
        Self {
            position: Vector3::new(a[0], a[1], a[2]),
            velocity: Vector3::new(a[3], a[4], a[5]),
            attitude: Vector3::new(a[6], a[7], a[8]),
            body_rates: Vector3::new(a[9], a[10], a[11]),
        }
    }
}

/// Body-to-world rotation R = Rz(yaw) Ry(pitch) Rx(roll).
pub fn rotation(attitude: &Vector3<f64>) -> Matrix3<f64> {
    let (sp, cp) = attitude.x.sin_cos();
    let (st, ct) = attitude.y.sin_cos();
    let (ss, cs) = attitude.z.sin_cos();
    Matrix3::new(
        cs * ct,
        cs * st * sp - ss * cp,
        cs * st * cp + ss * sp,
        ss * ct,
        ss * st * sp + cs * cp,
        ss * st * cp - cs * sp,
        -st,
        ct * sp,
        ct * cp,
    )
}

/// ω̇ = I⁻¹(τ − ω × Iω) for a diagonal inertia tensor.
pub fn angular_acceleration(body_rates: &Vector3<f64>, torque: &Torque, params: &QuadParams) -> Vector3<f64> {
    let i = params.inertia;
    let w = body_rates;
    Vector3::new(
        (torque.roll + (i.y - i.z) * w.y * w.z) / i.x,
        (torque.pitch + (i.z - i.x) * w.x * w.z) / i.y,
        (torque.yaw + (i.x - i.y) * w.x * w.y) / i.z,
    )
}

/// World-frame acceleration under collective thrust and gravity.
pub fn translational_acceleration(state: &QuadState, total_thrust: f64, params: &QuadParams) -> Vector3<f64> {
    let thrust_dir = rotation(&state.attitude).column(2).into_owned();
    thrust_dir * (total_thrust / params.mass) - Vector3::new(0.0, 0.0, params.gravity)
        - state.velocity * (params.linear_drag / params.mass)
}

/// Euler-angle rates from body rates (Z-Y-X transfer matrix).
pub fn euler_rates(attitude: &Vector3<f64>, body_rates: &Vector3<f64>) -> Vector3<f64> {
    let (sp, cp) = attitude.x.sin_cos();
    let (st, ct) = attitude.y.sin_cos();
    let tt = st / ct;
    let w = body_rates;
    Vector3::new(
        w.x + sp * tt * w.y + cp * tt * w.z,
        cp * w.y - sp * w.z,
        (sp * w.y + cp * w.z) / ct,
    )
}

/// Collective thrust and body torques for rotor speeds ordered
/// front, right, back, left.
pub fn motor_forces(speeds: &[f64; 4], params: &QuadParams) -> (f64, Torque) {
    let sq = speeds.map(|w| w * w);
    let k = params.thrust_coefficient;
    let l = params.arm_length;
    let thrust = k * (sq[FRONT] + sq[RIGHT] + sq[BACK] + sq[LEFT]);
    let torque = Torque {
        roll: l * k * (sq[LEFT] - sq[RIGHT]),
        pitch: l * k * (sq[BACK] - sq[FRONT]),
        yaw: params.drag_coefficient * (sq[FRONT] + sq[BACK] - sq[LEFT] - sq[RIGHT]),
    };
    (thrust, torque)
}

/// Time derivative of the full state under fixed rotor speeds.
pub fn derivative(state: &QuadState, speeds: &[f64; 4], params: &QuadParams) -> QuadState {
    let (thrust, torque) = motor_forces(speeds, params);
    QuadState {
        position: state.velocity,
        velocity: translational_acceleration(state, thrust, params),
        attitude: euler_rates(&state.attitude, &state.body_rates),
        body_rates: angular_acceleration(&state.body_rates, &torque, params),
    }
}

/// Largest |pitch| accepted by [`step`].
pub const GIMBAL_MARGIN: f64 = std::f64::consts::FRAC_PI_2 - 1e-3;

/// Classical fourth-order Runge-Kutta step of `y' = f(t, y)`.
pub fn rk4<const N: usize, E>(
    t: f64,
    y: &[f64; N],
    dt: f64,
    mut f: impl FnMut(f64, &[f64; N]) -> Result<[f64; N], E>,
) -> Result<[f64; N], E> {
    let shifted = |k: &[f64; N], h: f64| -> [f64; N] {
        let mut out = *y;
        for (o, d) in out.iter_mut().zip(k) {
            *o += d * h;
        }
        out
    };
    let k1 = f(t, y)?;
    let k2 = f(t + dt / 2.0, &shifted(&k1, dt / 2.0))?;
    let k3 = f(t + dt / 2.0, &shifted(&k2, dt / 2.0))?;
    let k4 = f(t + dt, &shifted(&k3, dt))?;
    let mut out = *y;
    for i in 0..N {
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(out)
}

/// One RK4 step with rotor speeds held constant over `dt`.
pub fn step(state: &QuadState, speeds: &[f64; 4], dt: f64, params: &QuadParams) -> Result<QuadState, DynamicsError> {
    debug_assert!(dt > 0.0);
    let guard = |pitch: f64| {
        if pitch.abs() > GIMBAL_MARGIN {
            Err(DynamicsError::GimbalProximity { pitch })
        } else {
            Ok(())
        }
    };
    let next = rk4(0.0, &state.to_array(), dt, |_, y| {
        guard(y[7])?;
        Ok(derivative(&QuadState::from_array(y), speeds, params).to_array())
    })?;
    guard(next[7])?;
    Ok(QuadState::from_array(&next))
}

/// Advances only the body rates under a time-varying torque. The rotational
/// equation does not depend on position or attitude, so this is exact for
/// tumbling motions that would cross the Euler-angle singularity.
pub fn step_body_rates(
    t: f64,
    body_rates: &Vector3<f64>,
    dt: f64,
    params: &QuadParams,
    torque: impl Fn(f64) -> Torque,
) -> Vector3<f64> {
    let y = [body_rates.x, body_rates.y, body_rates.z];
    let next = rk4::<3, std::convert::Infallible>(t, &y, dt, |t, w| {
        let a = angular_acceleration(&Vector3::from(*w), &torque(t), params);
        Ok([a.x, a.y, a.z])
    });
    match next {
        Ok(w) => Vector3::from(w),
        Err(never) => match never {},
    }
}
