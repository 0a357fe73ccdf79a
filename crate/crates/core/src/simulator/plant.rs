use nalgebra::{Rotation3, Vector3};
use serde::{Deserialize, Serialize};

use super::SimError;
use crate::angle::wrap_pi;
use crate::control::ControlOutput;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlatformState {
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
    pub yaw: f64,
    pub yaw_rate: f64,
    pub time: f64,
}

impl PlatformState {
    pub fn at_rest(position: Vector3<f64>, yaw: f64) -> Self {
        Self {
            position,
            velocity: Vector3::zeros(),
            yaw: wrap_pi(yaw),
            yaw_rate: 0.0,
            time: 0.0,
        }
    }
}

/// Time constants of the inner tracking loop. A zero constant means the
/// command is tracked instantly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantParams {
    pub tau_v: f64,
    /// Yaw-rate lag while a non-zero yaw rate is commanded.
    pub tau_yaw: f64,
    /// Yaw-rate decay when the command is zero (heading hold).
    pub tau_hold: f64,
}

impl Default for PlantParams {
    fn default() -> Self {
        Self {
            tau_v: 0.5,
            tau_yaw: 3.0,
            tau_hold: 0.25,
        }
    }
}

impl PlantParams {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.tau_v > 0.0) || !(self.tau_yaw >= 0.0) || !(self.tau_hold >= 0.0) {
            return Err(SimError::Config(
                "tau_v must be positive and yaw time constants non-negative".into(),
            ));
        }
        Ok(())
    }
}

fn track(current: f64, target: f64, dt: f64, tau: f64) -> f64 {
    if tau <= dt {
        target
    } else {
        current + dt / tau * (target - current)
    }
}

/// One inner-loop step. Body-frame xy commands are rotated into the world by
/// the current yaw; position and yaw integrate the updated rates.
pub fn step_low(
    state: &PlatformState,
    command: &ControlOutput,
    dt: f64,
    plant: &PlantParams,
) -> PlatformState {
    let target = Rotation3::from_axis_angle(&Vector3::z_axis(), state.yaw)
        * Vector3::new(command.ux, command.uy, command.uz);
    let k = (dt / plant.tau_v).min(1.0);
    let velocity = state.velocity + (target - state.velocity) * k;
    let tau_w = if command.uw == 0.0 {
        plant.tau_hold
    } else {
        plant.tau_yaw
    };
    let yaw_rate = track(state.yaw_rate, command.uw, dt, tau_w);
    PlatformState {
        position: state.position + velocity * dt,
        velocity,
        yaw: wrap_pi(state.yaw + yaw_rate * dt),
        yaw_rate,
        time: state.time + dt,
    }
}
