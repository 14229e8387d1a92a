//! Live parameter tuning over HTTP and WebSocket.
//!
//! A thin transport around [`snapforge`]: profiles come straight from
//! [`snapforge::forcemodel::profile_table`] and streamed forces are the
//! simulator's own values. Sessions are independent; each owns a simulator
//! state and parameter set over a surface shared read-only with the others.
//!
//! | Route | |
//! |---|---|
//! | `GET /profile?a=&b=&samples=` | [`api::ProfileResponse`] |
//! | `GET /surfaces` | list of [`api::SurfaceSummary`] |
//! | `POST /session` | [`api::CreateSession`] → 201 [`api::SessionInfo`] |
//! | `GET /session/{id}`, `DELETE /session/{id}` | info, removal |
//! | `POST /session/{id}/params` | partial [`snapforge::ForceParams`] → [`api::ParamsAck`] |
//! | `GET /session/{id}/stream?clock=realtime\|lockstep` | WebSocket of [`api::ClientMessage`] / [`api::ServerMessage`] |
//!
//! Errors are JSON [`api::ErrorBody`] with status 400 (bad input), 404
//! (unknown session or surface) or 409 (a second stream on one session).

pub mod api;
pub mod catalog;
pub mod server;
pub mod session;

/// Simulation steps per streamed frame: 62.5 frames/s at 1 kHz.
pub const FRAME_EVERY: u64 = 16;

pub use catalog::{Catalog, Surface};
pub use server::router;

// The guide's API chapter is compiled and run as a doc-test.
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/tuneserver-api.md")]
struct ApiChapter;
