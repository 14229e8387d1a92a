#![allow(dead_code)]

use std::net::SocketAddr;
use std::sync::{Arc, OnceLock};

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use futures_util::{SinkExt, StreamExt};
use http_body_util::BodyExt;
use serde::de::DeserializeOwned;
use serde_json::Value;
use snapforge_tuneserver::api::{ClientMessage, FramePayload, ServerMessage, SessionInfo};
use snapforge_tuneserver::{router, Catalog, Surface};
use tokio::net::TcpStream;
use tokio_tungstenite::tungstenite::Message;
use tokio_tungstenite::{MaybeTlsStream, WebSocketStream};

pub const RESOLUTION: usize = 32;

/// Built-in surfaces, built once per test binary.
pub fn surfaces() -> &'static (Arc<Surface>, Arc<Surface>) {
    static CELL: OnceLock<(Arc<Surface>, Arc<Surface>)> = OnceLock::new();
    CELL.get_or_init(|| {
        let c = Catalog::builtin(RESOLUTION).unwrap();
        (c.get(Some("plane")).unwrap(), c.get(Some("bump")).unwrap())
    })
}

pub fn catalog() -> Catalog {
    let (plane, bump) = surfaces();
    let mut c = Catalog::default();
    for s in [plane, bump] {
        c.insert(Surface::new(&s.name, s.index.clone(), (*s.field).clone()));
    }
    c
}

pub fn app() -> Router {
    router(catalog())
}

pub async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    use tower::ServiceExt;
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            req = req.header("content-type", "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let resp = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()))
    };
    (status, value)
}

pub fn parse<T: DeserializeOwned>(v: Value) -> T {
    serde_json::from_value(v).unwrap()
}

pub async fn open_session(app: &Router, body: Value) -> SessionInfo {
    let (status, v) = call(app, Method::POST, "/session", Some(body)).await;
    assert_eq!(status, StatusCode::CREATED, "{v}");
    parse(v)
}

/// Serves `app` on an ephemeral port.
pub async fn serve(app: Router) -> SocketAddr {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });
    addr
}

pub type Socket = WebSocketStream<MaybeTlsStream<TcpStream>>;

pub struct Stream {
    pub ws: Socket,
}

impl Stream {
    pub async fn connect(addr: SocketAddr, id: &str, clock: &str) -> Result<(Self, FramePayload), tokio_tungstenite::tungstenite::Error> {
        let url = format!("ws://{addr}/session/{id}/stream?clock={clock}");
        let (ws, _) = tokio_tungstenite::connect_async(url).await?;
        let mut s = Self { ws };
        let first = s.frame().await;
        Ok((s, first))
    }

    pub async fn send(&mut self, msg: &ClientMessage) {
        self.send_text(&serde_json::to_string(msg).unwrap()).await;
    }

    pub async fn send_text(&mut self, text: &str) {
        self.ws.send(Message::Text(text.into())).await.unwrap();
    }

    pub async fn recv(&mut self) -> ServerMessage {
        loop {
            let msg = tokio::time::timeout(std::time::Duration::from_secs(20), self.ws.next())
                .await
                .expect("server reply in time")
                .expect("stream open")
                .unwrap();
            if let Message::Text(t) = msg {
                return serde_json::from_str(t.as_str()).unwrap();
            }
        }
    }

    pub async fn frame(&mut self) -> FramePayload {
        match self.recv().await {
            ServerMessage::Frame(f) => f,
            other => panic!("expected a frame, got {other:?}"),
        }
    }

    /// Steps and collects the frames: `steps / every` of them, plus the last
    /// step if it is not a multiple.
    pub async fn step(&mut self, goal: Option<[f64; 3]>, steps: u64, every: u64, start: u64) -> Vec<FramePayload> {
        self.send(&ClientMessage::Step { goal, steps, every: Some(every) }).await;
        let expected = (start + 1..=start + steps)
            .filter(|k| k % every == 0 || *k == start + steps)
            .count();
        let mut out = Vec::with_capacity(expected);
        for _ in 0..expected {
            out.push(self.frame().await);
        }
        out
    }
}
