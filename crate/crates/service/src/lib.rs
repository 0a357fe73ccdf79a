//! Live simulation over a WebSocket: telemetry out at the high-level rate,
//! operator commands and mode switches in.

pub mod protocol;
mod server;
mod session;

pub use server::{start, ServeOptions, ServerHandle};
pub use session::{ClientId, LiveSession, Role, DEFAULT_GRACE_PERIOD};

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Sim(#[from] pole_assist::simulator::SimError),
    #[error(transparent)]
    Scenario(#[from] pole_assist::scenario::ScenarioError),
    #[error("server task failed: {0}")]
    Task(String),
}
