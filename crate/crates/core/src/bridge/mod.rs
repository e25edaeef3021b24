//! Planning against out-of-process simulators with state save/restore.
//!
//! The wire format is newline-delimited JSON over any byte stream (child
//! process pipes, TCP). The simulator keeps states on its side and hands out
//! [`StateHandle`]s; stepping a handle never invalidates it. See
//! `docs/bridge-protocol.md` for the message schema.

mod client;
pub mod protocol;
mod server;

pub use client::{BridgeEnv, ReleaseAck};
pub use protocol::{ErrorCode, Request, Response, StateHandle, PROTOCOL_VERSION};
pub use server::serve;
