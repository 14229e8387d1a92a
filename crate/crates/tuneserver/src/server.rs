//! Routes and the stream loop.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, MutexGuard};
use std::time::Duration;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{Map, Value};
use snapforge::forcemodel::profile_table;
use snapforge::Mode;
use tokio::time::{interval, Instant, MissedTickBehavior};

use crate::api::{
    ClientMessage, CreateSession, ErrorBody, ParamsAck, ProfileQuery, ProfileResponse,
    ServerMessage, SessionInfo, SurfaceSummary, DEFAULT_PROFILE_SAMPLES,
};
use crate::catalog::Catalog;
use crate::session::Session;
use crate::FRAME_EVERY;

/// Real-time catch-up never runs more than this many steps per frame; a
/// stalled server drops simulated time rather than spiralling.
const MAX_CATCH_UP: u64 = 4 * FRAME_EVERY;

type Shared = Arc<Mutex<Session>>;

pub struct AppState {
    catalog: Catalog,
    sessions: Mutex<HashMap<String, Shared>>,
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    // A panicked step leaves the state as of its last completed step.
    m.lock().unwrap_or_else(|e| e.into_inner())
}

impl AppState {
    fn session(&self, id: &str) -> Result<Shared, ApiError> {
        lock(&self.sessions)
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("no session {id:?}")))
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
        }
    }

    fn bad(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            error: self.message,
        };
        (self.status, Json(body)).into_response()
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        Self::new(e.status(), e.body_text())
    }
}

impl From<QueryRejection> for ApiError {
    fn from(e: QueryRejection) -> Self {
        Self::bad(e.body_text())
    }
}

pub fn router(catalog: Catalog) -> Router {
    let state = Arc::new(AppState {
        catalog,
        sessions: Mutex::default(),
    });
    Router::new()
        .route("/profile", get(profile))
        .route("/surfaces", get(surfaces))
        .route("/session", post(create_session))
        .route("/session/{id}", get(session_info).delete(delete_session))
        .route("/session/{id}/params", post(set_params))
        .route("/session/{id}/stream", get(stream))
        .with_state(state)
}

async fn profile(
    q: Result<Query<ProfileQuery>, QueryRejection>,
) -> Result<Json<ProfileResponse>, ApiError> {
    let Query(q) = q?;
    let (a, b) = (q.a.unwrap_or(3.0), q.b.unwrap_or(2.0));
    let samples = q.samples.unwrap_or(DEFAULT_PROFILE_SAMPLES);
    let rows = profile_table(a, b, samples).map_err(|e| ApiError::bad(e.to_string()))?;
    Ok(Json(ProfileResponse { a, b, samples, rows }))
}

async fn surfaces(State(app): State<Arc<AppState>>) -> Json<Vec<SurfaceSummary>> {
    Json(app.catalog.summaries())
}

async fn create_session(
    State(app): State<Arc<AppState>>,
    body: Option<Json<CreateSession>>,
) -> Result<(StatusCode, Json<SessionInfo>), ApiError> {
    let req = body.map(|Json(b)| b).unwrap_or_default();
    let surface = app.catalog.get(req.surface.as_deref()).ok_or_else(|| {
        let known: Vec<&str> = app.catalog.names().collect();
        ApiError::new(
            StatusCode::NOT_FOUND,
            format!("unknown surface {:?}; known: {}", req.surface, known.join(", ")),
        )
    })?;
    let id = format!("{:016x}", rand::random::<u64>());
    let session = Session::new(id.clone(), surface, req.mode.unwrap_or(Mode::HapticSnap), req.params)
        .map_err(ApiError::bad)?;
    let info = session.info();
    lock(&app.sessions).insert(id, Arc::new(Mutex::new(session)));
    Ok((StatusCode::CREATED, Json(info)))
}

async fn session_info(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<Json<SessionInfo>, ApiError> {
    let s = app.session(&id)?;
    let info = lock(&s).info();
    Ok(Json(info))
}

async fn delete_session(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<StatusCode, ApiError> {
    let s = app.session(&id)?;
    lock(&app.sessions).remove(&id);
    lock(&s).closed = true;
    Ok(StatusCode::NO_CONTENT)
}

async fn set_params(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Result<Json<Map<String, Value>>, JsonRejection>,
) -> Result<Json<ParamsAck>, ApiError> {
    let s = app.session(&id)?;
    let Json(patch) = body?;
    let ack = lock(&s).patch_params(&patch).map_err(ApiError::bad)?;
    Ok(Json(ack))
}

/// How a stream advances the simulation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Clock {
    /// 1 kHz against the wall clock, one frame every [`FRAME_EVERY`] steps.
    #[default]
    Realtime,
    /// Only `step` messages advance the simulation.
    Lockstep,
}

#[derive(Debug, Default, Deserialize)]
struct StreamQuery {
    #[serde(default)]
    clock: Clock,
}

/// Clears the session's streaming flag however the stream ends.
struct Attached(Shared);

impl Drop for Attached {
    fn drop(&mut self) {
        lock(&self.0).streaming = false;
    }
}

async fn stream(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    q: Result<Query<StreamQuery>, QueryRejection>,
    ws: WebSocketUpgrade,
) -> Result<Response, ApiError> {
    let Query(q) = q?;
    let session = app.session(&id)?;
    {
        let mut s = lock(&session);
        if s.streaming {
            return Err(ApiError::new(
                StatusCode::CONFLICT,
                format!("session {id:?} already has a stream"),
            ));
        }
        s.streaming = true;
    }
    let attached = Attached(session);
    Ok(ws.on_upgrade(move |socket| run_stream(socket, attached, q.clock)))
}

async fn send(socket: &mut WebSocket, msg: &ServerMessage) -> bool {
    let text = serde_json::to_string(msg).expect("payloads serialize");
    socket.send(Message::Text(text.into())).await.is_ok()
}

async fn send_all(socket: &mut WebSocket, msgs: Vec<ServerMessage>) -> bool {
    for m in &msgs {
        if !send(socket, m).await {
            return false;
        }
    }
    true
}

fn error(message: impl Into<String>) -> ServerMessage {
    ServerMessage::Error {
        message: message.into(),
    }
}

/// Applies one client message; returns the replies.
async fn handle(session: &Shared, clock: Clock, text: &str) -> Vec<ServerMessage> {
    let msg: ClientMessage = match serde_json::from_str(text) {
        Ok(m) => m,
        Err(e) => return vec![error(format!("malformed message: {e}"))],
    };
    match msg {
        ClientMessage::Goal { goal } => match lock(session).set_goal(goal) {
            Ok(()) => vec![],
            Err(e) => vec![error(e)],
        },
        ClientMessage::Reset { position } => {
            let mut s = lock(session);
            match s.reset(position) {
                Ok(()) => vec![ServerMessage::Frame(s.frame())],
                Err(e) => vec![error(e)],
            }
        }
        ClientMessage::Step { .. } if clock != Clock::Lockstep => {
            vec![error("step messages need a stream opened with clock=lockstep")]
        }
        ClientMessage::Step { goal, steps, every } => {
            let session = session.clone();
            let run = move || {
                let mut s = lock(&session);
                if let Err(e) = s.set_goal(goal) {
                    return vec![error(e)];
                }
                let mut frames = Vec::new();
                let result = s.advance(steps, every.unwrap_or(FRAME_EVERY), &mut frames);
                let mut out: Vec<_> = frames.into_iter().map(ServerMessage::Frame).collect();
                if let Err(e) = result {
                    out.push(error(e));
                }
                out
            };
            tokio::task::spawn_blocking(run)
                .await
                .unwrap_or_else(|e| vec![error(format!("step failed: {e}"))])
        }
    }
}

async fn run_stream(mut socket: WebSocket, attached: Attached, clock: Clock) {
    let session = attached.0.clone();
    let first = ServerMessage::Frame(lock(&session).frame());
    if !send(&mut socket, &first).await {
        return;
    }
    let period = Duration::from_millis(FRAME_EVERY);
    let mut ticker = interval(period);
    ticker.set_missed_tick_behavior(MissedTickBehavior::Skip);
    let start = Instant::now();
    let mut stepped = 0u64;
    loop {
        tokio::select! {
            msg = socket.recv() => {
                let replies = match msg {
                    Some(Ok(Message::Text(text))) => handle(&session, clock, text.as_str()).await,
                    Some(Ok(Message::Binary(_))) => vec![error("binary frames are not supported; send JSON text")],
                    Some(Ok(Message::Close(_))) | None | Some(Err(_)) => break,
                    Some(Ok(_)) => continue,
                };
                if !send_all(&mut socket, replies).await {
                    break;
                }
            }
            _ = ticker.tick(), if clock == Clock::Realtime => {
                let due = (start.elapsed().as_secs_f64() * 1000.0) as u64;
                let n = due.saturating_sub(stepped).min(MAX_CATCH_UP);
                stepped = due;
                let mut frames = Vec::new();
                let result = lock(&session).advance(n, u64::MAX, &mut frames);
                let mut out: Vec<_> = frames.into_iter().map(ServerMessage::Frame).collect();
                if let Err(e) = result {
                    out.push(error(e));
                }
                if !send_all(&mut socket, out).await {
                    break;
                }
            }
        }
        if lock(&session).closed {
            let _ = send(&mut socket, &error("session deleted")).await;
            break;
        }
    }
    drop(attached);
}
