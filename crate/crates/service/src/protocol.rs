//! Wire format. Every frame is one JSON object tagged by `type`. Yaw angles
//! are degrees and yaw rates deg/s on the wire.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Manual,
    Inspect,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClientMessage {
    Command { ux: f64, uy: f64, uz: f64, uw: f64 },
    Mode { mode: Mode },
    /// Toggles the simulation pause.
    Pause,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TelemetryMessage {
    pub t: f64,
    pub state: String,
    pub position: [f64; 3],
    pub yaw: f64,
    pub range: Option<f64>,
    pub detection_valid: bool,
    /// ux, uy, uz in m/s and uw in deg/s.
    pub requested: [f64; 4],
    pub applied: [f64; 4],
    pub zone_radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Telemetry(TelemetryMessage),
    Error { message: String },
}

impl ServerMessage {
    pub fn error(message: impl Into<String>) -> Self {
        ServerMessage::Error {
            message: message.into(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("server messages always serialize")
    }
}

/// JSON schema of the telemetry frame, as published to clients.
pub const TELEMETRY_SCHEMA: &str = include_str!("../../../schemas/telemetry.schema.json");
/// JSON schema of the client frames.
pub const CLIENT_SCHEMA: &str = include_str!("../../../schemas/client.schema.json");
