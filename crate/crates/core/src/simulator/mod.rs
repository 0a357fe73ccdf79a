//! Closed-loop plant with a 1 Hz assistance loop nested above a fast
//! velocity-tracking loop.

mod episode;
mod log;
mod orbit;
mod plant;
mod trace;

pub use episode::{perceive, run_episode, Episode};
pub use log::{FlightLog, FlightRecord, LogMetadata, LogSummary, CSV_HEADER};
pub use orbit::{orbit_check, OrbitReport};
pub use plant::{step_low, PlantParams, PlatformState};
pub use trace::{ModeEvent, OperatorTrace, TraceSegment};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::control::{ControlError, OperatorInput};
use crate::perception::PerceptionError;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    Config(String),
    #[error("invalid operator trace: {0}")]
    Trace(String),
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error(transparent)]
    Perception(#[from] PerceptionError),
    #[error("log has no lateral-only segment with a valid detection")]
    InsufficientSegment,
}

/// How detections are produced each high-level tick.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PerceptionMode {
    /// Ground-truth range and bearing, valid inside the sensor range.
    Perfect,
    /// Synthetic camera clouds through the detection pipeline.
    PointCloud { noise_sigma: f64, dropout: f64 },
}

/// Additive range error applied to detections during `[t_start, t_start + duration)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RangeBias {
    pub t_start: f64,
    pub duration: f64,
    pub bias: f64,
}

impl RangeBias {
    pub fn active(&self, t: f64) -> bool {
        t >= self.t_start && t < self.t_start + self.duration
    }

    pub fn end(&self) -> f64 {
        self.t_start + self.duration
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub f_high: f64,
    pub f_low: f64,
    pub plant: PlantParams,
    pub v_max: f64,
    pub vz_max: f64,
    pub yaw_rate_max: f64,
    pub perception: PerceptionMode,
    pub range_bias: Vec<RangeBias>,
    /// Constant world-frame velocity added to the platform, for robustness runs.
    pub disturbance: Vector3<f64>,
    pub start_position: Vector3<f64>,
    pub start_yaw: f64,
    /// Episode length; the trace end when `None`.
    pub duration: Option<f64>,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            f_high: 1.0,
            f_low: 400.0,
            plant: PlantParams::default(),
            v_max: 1.0,
            vz_max: 1.0,
            yaw_rate_max: 30f64.to_radians(),
            perception: PerceptionMode::Perfect,
            range_bias: Vec::new(),
            disturbance: Vector3::zeros(),
            start_position: Vector3::new(6.0, 0.0, 5.0),
            start_yaw: std::f64::consts::PI,
            duration: None,
            seed: 0,
        }
    }
}

impl SimConfig {
    /// Low-level steps per high-level tick.
    pub fn ratio(&self) -> usize {
        (self.f_low / self.f_high).round() as usize
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let err = |m: &str| Err(SimError::Config(m.into()));
        if !(self.f_high > 0.0) || !(self.f_low > 0.0) {
            return err("frequencies must be positive");
        }
        let ratio = self.f_low / self.f_high;
        if ratio < 1.0 || (ratio - ratio.round()).abs() > 1e-9 {
            return err("f_low must be an integer multiple of f_high");
        }
        self.plant.validate()?;
        if !(self.v_max > 0.0) || !(self.vz_max > 0.0) || !(self.yaw_rate_max > 0.0) {
            return err("platform limits must be positive");
        }
        if let PerceptionMode::PointCloud { noise_sigma, dropout } = self.perception {
            if !(noise_sigma >= 0.0) || !(0.0..1.0).contains(&dropout) {
                return err("noise sigma must be >= 0 and dropout in [0, 1)");
            }
        }
        if self.range_bias.iter().any(|b| !(b.duration >= 0.0) || !b.bias.is_finite()) {
            return err("range bias windows need a finite bias and non-negative duration");
        }
        if !self.disturbance.iter().all(|v| v.is_finite())
            || !self.start_position.iter().all(|v| v.is_finite())
            || !self.start_yaw.is_finite()
        {
            return err("non-finite start state or disturbance");
        }
        if self.duration.is_some_and(|d| !(d > 0.0)) {
            return err("duration must be positive");
        }
        Ok(())
    }

    /// Limits an operator request to the stick range: horizontal speed as a
    /// vector, vertical speed and yaw rate per channel.
    pub fn clamp_stick(&self, u: OperatorInput) -> OperatorInput {
        let speed = u.ux.hypot(u.uy);
        let k = if speed > self.v_max { self.v_max / speed } else { 1.0 };
        OperatorInput {
            ux: u.ux * k,
            uy: u.uy * k,
            uz: u.uz.clamp(-self.vz_max, self.vz_max),
            uw: u.uw.clamp(-self.yaw_rate_max, self.yaw_rate_max),
        }
    }

    pub fn bias_at(&self, t: f64) -> f64 {
        self.range_bias
            .iter()
            .filter(|b| b.active(t))
            .map(|b| b.bias)
            .sum()
    }
}
