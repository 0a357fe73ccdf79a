use serde::{Deserialize, Serialize};

use super::SimError;
use crate::control::{ModeSwitch, OperatorInput};

/// Constant operator input over `[t_start, t_start + duration)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceSegment {
    pub t_start: f64,
    pub duration: f64,
    pub input: OperatorInput,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeEvent {
    pub t: f64,
    pub mode: ModeSwitch,
}

/// Scripted operator. Outside every segment the input is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorTrace {
    pub segments: Vec<TraceSegment>,
    pub mode_events: Vec<ModeEvent>,
}

impl OperatorTrace {
    /// Trace that switches to inspect mode at t = 0.
    pub fn new(segments: Vec<TraceSegment>) -> Self {
        Self {
            segments,
            mode_events: vec![ModeEvent {
                t: 0.0,
                mode: ModeSwitch::Inspect,
            }],
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let mut end = f64::NEG_INFINITY;
        for s in &self.segments {
            if !(s.t_start >= 0.0) || !(s.duration >= 0.0) {
                return Err(SimError::Trace("segment times must be non-negative".into()));
            }
            let i = s.input;
            if ![i.ux, i.uy, i.uz, i.uw].iter().all(|v| v.is_finite()) {
                return Err(SimError::Trace("non-finite input".into()));
            }
            if s.t_start < end - 1e-9 {
                return Err(SimError::Trace(format!(
                    "segment at t = {} overlaps or is out of order",
                    s.t_start
                )));
            }
            end = s.t_start + s.duration;
        }
        if self.mode_events.windows(2).any(|w| w[1].t < w[0].t)
            || self.mode_events.iter().any(|e| !(e.t >= 0.0))
        {
            return Err(SimError::Trace("mode events must be time-ordered".into()));
        }
        Ok(())
    }

    pub fn end_time(&self) -> f64 {
        self.segments
            .iter()
            .map(|s| s.t_start + s.duration)
            .fold(0.0, f64::max)
    }

    pub fn input_at(&self, t: f64) -> OperatorInput {
        self.segments
            .iter()
            .find(|s| t >= s.t_start && t < s.t_start + s.duration)
            .map(|s| s.input)
            .unwrap_or_default()
    }

    /// Last mode event in `[t0, t1)`, if any.
    pub fn switch_in(&self, t0: f64, t1: f64) -> ModeSwitch {
        self.mode_events
            .iter()
            .filter(|e| e.t >= t0 && e.t < t1)
            .last()
            .map(|e| e.mode)
            .unwrap_or_default()
    }
}
