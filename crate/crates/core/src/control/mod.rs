//! Assisted control: flight-mode state machine and input shaping.

mod law;
mod log;
mod state;

pub use law::{
    assist, attenuate, attenuation_factor, is_inward, psi_v, repel, threat_cone, yaw_command,
};
pub use log::{write_frames_csv, ControlFrame};
pub use state::{
    is_allowed_transition, step_state, AssistController, ModeSwitch, SystemState, TickResult,
};

use serde::{Deserialize, Serialize};

/// Operator velocity request in the platform frame (m/s, yaw in rad/s).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct OperatorInput {
    pub ux: f64,
    pub uy: f64,
    pub uz: f64,
    pub uw: f64,
}

impl OperatorInput {
    pub fn new(ux: f64, uy: f64, uz: f64, uw: f64) -> Self {
        Self { ux, uy, uz, uw }
    }

    pub fn zero() -> Self {
        Self::default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlOutput {
    pub ux: f64,
    pub uy: f64,
    pub uz: f64,
    pub uw: f64,
    pub state: SystemState,
    pub attenuation_applied: bool,
    pub reversed: bool,
}

/// Which quantity the yaw deadband is tested against.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeadbandMode {
    /// Change in pointing error between ticks, |psi(t) - psi(t-1)|.
    #[default]
    AsWritten,
    /// Pointing error itself, |psi(t)|.
    PointingError,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlParams {
    pub kp: f64,
    pub kd: f64,
    pub yaw_deadband: f64,
    pub deadband_mode: DeadbandMode,
    pub rz: f64,
    /// Added to the tangent-cone half-angle when classifying inputs as inward.
    pub eta_margin: f64,
    pub threat_distance: f64,
    pub hysteresis: f64,
    /// Gain on the attenuation factor.
    pub v_gain: f64,
    /// Outward speed forced in state 4 when the shaped input is weaker; 0 off.
    pub min_egress_speed: f64,
    pub dt_high: f64,
    pub v_max: f64,
    pub yaw_rate_max: f64,
}

impl Default for ControlParams {
    fn default() -> Self {
        Self {
            kp: 3.0,
            kd: 4.0,
            yaw_deadband: 0.05,
            deadband_mode: DeadbandMode::AsWritten,
            rz: 2.0,
            eta_margin: 0.0,
            threat_distance: 2.0,
            hysteresis: 0.1,
            v_gain: 1.0,
            min_egress_speed: 0.0,
            dt_high: 1.0,
            v_max: 1.0,
            yaw_rate_max: 30f64.to_radians(),
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
#[error("invalid control parameters: {0}")]
pub struct ControlError(pub String);

impl ControlParams {
    pub fn validate(&self) -> Result<(), ControlError> {
        if self.kp < 0.0 || self.kd < 0.0 {
            return Err(ControlError("gains must be non-negative".into()));
        }
        if !(self.rz > 0.0) || !(self.dt_high > 0.0) {
            return Err(ControlError("rz and dt_high must be positive".into()));
        }
        if self.yaw_deadband < 0.0
            || self.hysteresis < 0.0
            || self.threat_distance < 0.0
            || self.min_egress_speed < 0.0
            || self.eta_margin < 0.0
        {
            return Err(ControlError("thresholds must be non-negative".into()));
        }
        if !(self.v_max > 0.0) || !(self.yaw_rate_max > 0.0) {
            return Err(ControlError("limits must be positive".into()));
        }
        Ok(())
    }
}
