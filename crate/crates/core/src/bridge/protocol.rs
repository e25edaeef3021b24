use serde::{Deserialize, Serialize};

use crate::env::{Action, EnvironmentDescriptor};

pub const PROTOCOL_VERSION: u32 = 1;

/// Opaque state identifier issued by the simulator. Never reused within a session.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateHandle(pub String);

impl std::fmt::Display for StateHandle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// Client to simulator, one JSON object per line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Request {
    Hello {
        protocol_version: u32,
    },
    Reset {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        id: Option<u64>,
        seed: u64,
    },
    Step {
        id: u64,
        handle: StateHandle,
        action: Action,
    },
    Release {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        id: Option<u64>,
        handles: Vec<StateHandle>,
    },
}

/// Simulator to client, one JSON object per line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Response {
    Hello {
        protocol_version: u32,
        descriptor: EnvironmentDescriptor,
    },
    Reset {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        id: Option<u64>,
        handle: StateHandle,
        observation: Vec<f64>,
    },
    Step {
        id: u64,
        handle: StateHandle,
        observation: Vec<f64>,
        reward: f64,
        dead: bool,
        #[serde(default)]
        terminal: bool,
    },
    Release {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        id: Option<u64>,
        ok: bool,
        warnings: Vec<String>,
    },
    Error {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        id: Option<u64>,
        code: ErrorCode,
        message: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    StaleHandle,
    BadAction,
    Malformed,
    Internal,
}

impl ErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::StaleHandle => "stale_handle",
            ErrorCode::BadAction => "bad_action",
            ErrorCode::Malformed => "malformed",
            ErrorCode::Internal => "internal",
        }
    }
}
