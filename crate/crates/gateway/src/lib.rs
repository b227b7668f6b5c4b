//! HTTP service and command-line front end for the clarify runtime.
//!
//! * [`session`] - the executor thread and its message-passing handle.
//! * [`http`] - the JSON endpoints.
//! * [`commands`] - `learn`, `run`, `serve`, `export-dot` and `gen-demos`.

pub mod commands;
pub mod http;
pub mod session;

pub use http::router;
pub use session::{Pacing, SessionError, SessionHandle, SessionOptions, Snapshot};
