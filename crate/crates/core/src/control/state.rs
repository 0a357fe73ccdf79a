use serde::{Deserialize, Serialize};
use std::fmt;

use super::law::{assist, is_inward, psi_v};
use super::{ControlOutput, ControlParams, OperatorInput};
use crate::perception::Detection;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SystemState {
    Manual,
    Inspect1,
    Inspect2,
    Inspect3,
    Inspect4,
}

impl SystemState {
    pub const ALL: [SystemState; 5] = [
        SystemState::Manual,
        SystemState::Inspect1,
        SystemState::Inspect2,
        SystemState::Inspect3,
        SystemState::Inspect4,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SystemState::Manual => "Manual",
            SystemState::Inspect1 => "Inspect1",
            SystemState::Inspect2 => "Inspect2",
            SystemState::Inspect3 => "Inspect3",
            SystemState::Inspect4 => "Inspect4",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }

    pub fn is_inspect(&self) -> bool {
        !matches!(self, SystemState::Manual)
    }
}

impl fmt::Display for SystemState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Operator's flight-mode selector for this tick.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeSwitch {
    #[default]
    None,
    Manual,
    Inspect,
}

/// Edge set of the flight-mode graph. Self loops are allowed.
pub fn is_allowed_transition(from: SystemState, to: SystemState) -> bool {
    use SystemState::*;
    if from == to {
        return true;
    }
    matches!(
        (from, to),
        (_, Manual)
            | (Manual, Inspect1)
            | (Inspect1, Inspect2 | Inspect3 | Inspect4)
            | (Inspect2 | Inspect3 | Inspect4, Inspect1)
            | (Inspect2, Inspect3)
            | (Inspect3, Inspect2 | Inspect4)
            | (Inspect4, Inspect3)
    )
}

pub fn step_state(
    current: SystemState,
    detection: &Detection,
    _requested: &OperatorInput,
    range: f64,
    psi_v: Option<f64>,
    params: &ControlParams,
    switch: ModeSwitch,
) -> SystemState {
    use SystemState::*;
    match switch {
        ModeSwitch::Manual => return Manual,
        ModeSwitch::Inspect if current == Manual => return Inspect1,
        _ => {}
    }
    if current == Manual {
        return Manual;
    }
    if !detection.valid {
        return Inspect1;
    }
    let breached = range <= params.rz;
    let threat = breached
        || (is_inward(range, psi_v, params) && range - params.rz < params.threat_distance);
    match current {
        Manual => Manual,
        Inspect1 if breached => Inspect4,
        Inspect1 if threat => Inspect3,
        Inspect1 => Inspect2,
        Inspect2 if threat => Inspect3,
        Inspect2 => Inspect2,
        Inspect3 if breached => Inspect4,
        Inspect3 if !threat => Inspect2,
        Inspect3 => Inspect3,
        Inspect4 if range > params.rz + params.hysteresis => Inspect3,
        Inspect4 => Inspect4,
    }
}

/// State-owning controller stepped once per high-level tick.
#[derive(Debug, Clone)]
pub struct AssistController {
    params: ControlParams,
    state: SystemState,
    psi_prev: Option<f64>,
}

/// Everything the controller decided on one tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TickResult {
    pub output: ControlOutput,
    pub psi: Option<f64>,
    pub psi_v: Option<f64>,
}

impl AssistController {
    pub fn new(params: ControlParams) -> Self {
        Self {
            params,
            state: SystemState::Manual,
            psi_prev: None,
        }
    }

    pub fn with_state(params: ControlParams, state: SystemState) -> Self {
        Self {
            state,
            ..Self::new(params)
        }
    }

    pub fn state(&self) -> SystemState {
        self.state
    }

    pub fn params(&self) -> &ControlParams {
        &self.params
    }

    /// Steps the state machine and shapes `requested`. The pointing error is
    /// the detection bearing, i.e. the angle from the nose to the pole.
    pub fn tick(
        &mut self,
        detection: &Detection,
        requested: &OperatorInput,
        switch: ModeSwitch,
    ) -> TickResult {
        let pv = if detection.valid {
            psi_v(requested, detection.bearing)
        } else {
            None
        };
        self.state = step_state(
            self.state,
            detection,
            requested,
            detection.range,
            pv,
            &self.params,
            switch,
        );
        let psi = detection.valid.then_some(detection.bearing);
        let psi_now = psi.unwrap_or(0.0);
        let psi_prev = self.psi_prev.unwrap_or(psi_now);
        let output = assist(
            self.state,
            detection,
            requested,
            psi_now,
            psi_prev,
            &self.params,
        );
        self.psi_prev = psi;
        TickResult {
            output,
            psi,
            psi_v: pv,
        }
    }
}
