use futures_util::{SinkExt, StreamExt};
use std::net::SocketAddr;
use std::time::{Duration, Instant};
use tokio::net::{TcpListener, TcpStream};
use tokio::sync::{broadcast, mpsc, oneshot};
use tokio::task::JoinHandle;
use tokio_tungstenite::tungstenite::Message;

use pole_assist::simulator::FlightLog;

use crate::protocol::ServerMessage;
use crate::session::{ClientId, LiveSession};
use crate::ServiceError;

#[derive(Debug, Clone)]
pub struct ServeOptions {
    /// Simulated seconds per wall-clock second.
    pub speed: f64,
    /// Stop after this many ticks; run until shut down when `None`.
    pub max_ticks: Option<u64>,
}

impl Default for ServeOptions {
    fn default() -> Self {
        Self {
            speed: 1.0,
            max_ticks: None,
        }
    }
}

enum Event {
    Connect(ClientId, mpsc::UnboundedSender<String>),
    Disconnect(ClientId),
    Text(ClientId, String),
}

/// Running server. Dropping the handle does not stop it; call `shutdown`.
pub struct ServerHandle {
    pub addr: SocketAddr,
    shutdown: Option<oneshot::Sender<()>>,
    sim: JoinHandle<Result<FlightLog, ServiceError>>,
    accept: JoinHandle<()>,
}

impl ServerHandle {
    /// Stops the simulation and returns the log recorded so far.
    pub async fn shutdown(mut self) -> Result<FlightLog, ServiceError> {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        self.finish().await
    }

    /// Waits for the simulation to end on its own (`max_ticks`).
    pub async fn finish(self) -> Result<FlightLog, ServiceError> {
        let out = self
            .sim
            .await
            .map_err(|e| ServiceError::Task(e.to_string()))?;
        self.accept.abort();
        out
    }
}

/// Binds `bind` and starts the simulation and accept tasks.
pub async fn start(
    session: LiveSession,
    bind: &str,
    opts: ServeOptions,
) -> Result<ServerHandle, ServiceError> {
    if !(opts.speed > 0.0) {
        return Err(ServiceError::Task("speed must be positive".into()));
    }
    let listener = TcpListener::bind(bind).await?;
    let addr = listener.local_addr()?;
    let (events_tx, events_rx) = mpsc::unbounded_channel();
    let (telemetry_tx, _) = broadcast::channel(256);
    let (shutdown_tx, shutdown_rx) = oneshot::channel();

    let sim = tokio::spawn(run_sim(
        session,
        opts,
        events_rx,
        telemetry_tx.clone(),
        shutdown_rx,
    ));
    let accept = tokio::spawn(accept_loop(listener, events_tx, telemetry_tx));
    Ok(ServerHandle {
        addr,
        shutdown: Some(shutdown_tx),
        sim,
        accept,
    })
}

async fn run_sim(
    mut session: LiveSession,
    opts: ServeOptions,
    mut events: mpsc::UnboundedReceiver<Event>,
    telemetry: broadcast::Sender<String>,
    mut shutdown: oneshot::Receiver<()>,
) -> Result<FlightLog, ServiceError> {
    let started = Instant::now();
    // the grace period is a link timeout, so it runs on wall time
    let now = || started.elapsed().as_secs_f64();
    let mut interval =
        tokio::time::interval(Duration::from_secs_f64(session.tick_period() / opts.speed));
    interval.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Delay);
    let mut clients = std::collections::HashMap::new();
    let mut ticks = 0u64;
    loop {
        tokio::select! {
            _ = &mut shutdown => break,
            ev = events.recv() => match ev {
                Some(Event::Connect(id, tx)) => {
                    let role = session.connect(id);
                    tracing::info!(id, ?role, "client connected");
                    clients.insert(id, tx);
                }
                Some(Event::Disconnect(id)) => {
                    session.disconnect(id);
                    clients.remove(&id);
                    tracing::info!(id, "client disconnected");
                }
                Some(Event::Text(id, text)) => {
                    if let Err(message) = session.handle(id, &text, now()) {
                        if let Some(tx) = clients.get(&id) {
                            let _ = tx.send(ServerMessage::error(message).to_json());
                        }
                    }
                }
                None => break,
            },
            _ = interval.tick() => {
                if let Some(t) = session.tick(now())? {
                    // no receivers is fine
                    let _ = telemetry.send(ServerMessage::Telemetry(t).to_json());
                    ticks += 1;
                    if opts.max_ticks.is_some_and(|m| ticks >= m) {
                        break;
                    }
                }
            }
        }
    }
    Ok(session.into_log())
}

async fn accept_loop(
    listener: TcpListener,
    events: mpsc::UnboundedSender<Event>,
    telemetry: broadcast::Sender<String>,
) {
    let mut next_id: ClientId = 0;
    loop {
        let Ok((stream, peer)) = listener.accept().await else {
            continue;
        };
        next_id += 1;
        let id = next_id;
        tracing::debug!(id, %peer, "accepted");
        tokio::spawn(connection(
            stream,
            id,
            events.clone(),
            telemetry.subscribe(),
        ));
    }
}

async fn connection(
    stream: TcpStream,
    id: ClientId,
    events: mpsc::UnboundedSender<Event>,
    mut telemetry: broadcast::Receiver<String>,
) {
    let Ok(ws) = tokio_tungstenite::accept_async(stream).await else {
        return;
    };
    let (mut sink, mut source) = ws.split();
    let (direct_tx, mut direct_rx) = mpsc::unbounded_channel();
    if events.send(Event::Connect(id, direct_tx)).is_err() {
        return;
    }
    loop {
        tokio::select! {
            msg = source.next() => match msg {
                Some(Ok(Message::Text(text))) => {
                    if events.send(Event::Text(id, text.to_string())).is_err() {
                        break;
                    }
                }
                Some(Ok(Message::Binary(_))) => {
                    let err = ServerMessage::error("binary frames are not supported").to_json();
                    if sink.send(Message::text(err)).await.is_err() {
                        break;
                    }
                }
                Some(Ok(Message::Close(_))) | None | Some(Err(_)) => break,
                Some(Ok(_)) => {}
            },
            Some(out) = direct_rx.recv() => {
                if sink.send(Message::text(out)).await.is_err() {
                    break;
                }
            }
            frame = telemetry.recv() => match frame {
                Ok(out) => {
                    if sink.send(Message::text(out)).await.is_err() {
                        break;
                    }
                }
                Err(broadcast::error::RecvError::Lagged(n)) => {
                    tracing::warn!(id, n, "client lagging, telemetry dropped");
                }
                Err(broadcast::error::RecvError::Closed) => break,
            },
        }
    }
    let _ = events.send(Event::Disconnect(id));
}
