use serde::{Deserialize, Serialize};
use std::path::Path;

use super::{read_json, ScenarioError};
use crate::control::{ModeSwitch, OperatorInput};
use crate::simulator::{ModeEvent, OperatorTrace, TraceSegment};

/// Operator script. Yaw rates are in deg/s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceFile {
    pub segments: Vec<SegmentConfig>,
    #[serde(default = "default_events")]
    pub mode_events: Vec<ModeEventConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentConfig {
    pub t_start_s: f64,
    pub duration_s: f64,
    pub ux_mps: f64,
    pub uy_mps: f64,
    pub uz_mps: f64,
    pub uw_dps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeEventConfig {
    pub t_s: f64,
    pub mode: ModeSwitch,
}

fn default_events() -> Vec<ModeEventConfig> {
    vec![ModeEventConfig {
        t_s: 0.0,
        mode: ModeSwitch::Inspect,
    }]
}

impl TraceFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ScenarioError> {
        let trace: Self = read_json(path.as_ref())?;
        trace.validate()?;
        Ok(trace)
    }

    pub fn trace(&self) -> OperatorTrace {
        OperatorTrace {
            segments: self
                .segments
                .iter()
                .map(|s| TraceSegment {
                    t_start: s.t_start_s,
                    duration: s.duration_s,
                    input: OperatorInput::new(s.ux_mps, s.uy_mps, s.uz_mps, s.uw_dps.to_radians()),
                })
                .collect(),
            mode_events: self
                .mode_events
                .iter()
                .map(|e| ModeEvent {
                    t: e.t_s,
                    mode: e.mode,
                })
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.trace()
            .validate()
            .map_err(|e| ScenarioError::Invalid(e.to_string()))
    }
}
