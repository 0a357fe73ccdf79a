use pole_assist::control::{ModeSwitch, OperatorInput};
use pole_assist::scenario::SceneConfig;
use pole_assist::simulator::{Episode, FlightLog, SimError};

use crate::protocol::{ClientMessage, Mode, TelemetryMessage};

pub const DEFAULT_GRACE_PERIOD: f64 = 1.0;

pub type ClientId = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Pilot,
    Observer,
}

/// Simulation state behind the socket. The `now` arguments are wall-clock
/// seconds and only drive the command grace period.
#[derive(Debug)]
pub struct LiveSession {
    episode: Episode,
    latched: OperatorInput,
    last_message: Option<f64>,
    pending: ModeSwitch,
    paused: bool,
    grace: f64,
    /// Connected clients in arrival order; the first is the pilot.
    clients: Vec<ClientId>,
}

impl LiveSession {
    pub fn new(scene: &SceneConfig, seed: Option<u64>, grace: f64) -> Result<Self, SimError> {
        let mut cfg = scene.sim();
        if let Some(seed) = seed {
            cfg.seed = seed;
        }
        let episode = Episode::new(
            &scene.infrastructure(),
            &scene.sensor(),
            &cfg,
            &scene.control(),
            &scene.filter(),
        )?;
        Ok(Self {
            episode,
            latched: OperatorInput::zero(),
            last_message: None,
            pending: ModeSwitch::None,
            paused: false,
            grace,
            clients: Vec::new(),
        })
    }

    pub fn tick_period(&self) -> f64 {
        1.0 / self.episode.config().f_high
    }

    pub fn connect(&mut self, id: ClientId) -> Role {
        self.clients.push(id);
        self.role(id)
    }

    /// Removes a client. When the pilot leaves, the next oldest client takes
    /// over; the held command still expires after the grace period.
    pub fn disconnect(&mut self, id: ClientId) {
        self.clients.retain(|c| *c != id);
    }

    pub fn role(&self, id: ClientId) -> Role {
        if self.clients.first() == Some(&id) {
            Role::Pilot
        } else {
            Role::Observer
        }
    }

    pub fn is_paused(&self) -> bool {
        self.paused
    }

    /// Handles one text frame. An `Err` carries the message for an error
    /// frame back to the sender.
    pub fn handle(&mut self, id: ClientId, text: &str, now: f64) -> Result<(), String> {
        let msg: ClientMessage =
            serde_json::from_str(text).map_err(|e| format!("malformed message: {e}"))?;
        if self.role(id) != Role::Pilot {
            return Err("observer connections are read-only".into());
        }
        match msg {
            ClientMessage::Command { ux, uy, uz, uw } => {
                if ![ux, uy, uz, uw].iter().all(|v| v.is_finite()) {
                    return Err("command channels must be finite".into());
                }
                let cfg = self.episode.config();
                self.latched = cfg.clamp_stick(OperatorInput::new(ux, uy, uz, uw.to_radians()));
            }
            ClientMessage::Mode { mode } => {
                self.pending = match mode {
                    Mode::Manual => ModeSwitch::Manual,
                    Mode::Inspect => ModeSwitch::Inspect,
                };
            }
            ClientMessage::Pause => self.paused = !self.paused,
        }
        self.last_message = Some(now);
        Ok(())
    }

    /// Operator input that the next tick will apply.
    pub fn held_input(&self, now: f64) -> OperatorInput {
        match self.last_message {
            Some(t) if now - t <= self.grace => self.latched,
            _ => OperatorInput::zero(),
        }
    }

    /// Advances one high-level tick unless paused.
    pub fn tick(&mut self, now: f64) -> Result<Option<TelemetryMessage>, SimError> {
        if self.paused {
            return Ok(None);
        }
        let input = self.held_input(now);
        let switch = std::mem::take(&mut self.pending);
        let zone_radius = self.episode.params().rz;
        let r = self.episode.step(input, switch)?;
        let f = &r.frame;
        let p = r.platform.position;
        let chan = |u: &OperatorInput| [u.ux, u.uy, u.uz, u.uw.to_degrees()];
        Ok(Some(TelemetryMessage {
            t: f.t,
            state: f.state.name().to_string(),
            position: [p.x, p.y, p.z],
            yaw: r.platform.yaw.to_degrees(),
            range: f.range,
            detection_valid: r.detection.valid,
            requested: chan(&f.requested),
            applied: chan(&f.applied),
            zone_radius,
        }))
    }

    pub fn into_log(self) -> FlightLog {
        self.episode.into_log()
    }
}
