use std::collections::HashMap;
use std::io::{BufRead, Write};

use super::protocol::{ErrorCode, Request, Response, StateHandle, PROTOCOL_VERSION};
use crate::env::Environment;
use crate::{Error, Result};

/// Serves `env` over a newline-delimited JSON stream until the reader hits EOF.
///
/// States are kept on this side of the wire; clients only ever see handles.
pub fn serve<E, R, W>(env: &E, reader: R, mut writer: W) -> Result<()>
where
    E: Environment,
    R: BufRead,
    W: Write,
{
    let mut store = HandleStore::<E::State>::default();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let response = match serde_json::from_str::<Request>(&line) {
            Ok(request) => handle(env, &mut store, request),
            Err(e) => Response::Error {
                id: None,
                code: ErrorCode::Malformed,
                message: format!("{e}: {line}"),
            },
        };
        serde_json::to_writer(&mut writer, &response)?;
        writer.write_all(b"\n")?;
        writer.flush()?;
    }
    Ok(())
}

struct HandleStore<S> {
    states: HashMap<StateHandle, S>,
    issued: u64,
}

impl<S> Default for HandleStore<S> {
    fn default() -> Self {
        Self {
            states: HashMap::new(),
            issued: 0,
        }
    }
}

impl<S> HandleStore<S> {
    fn issue(&mut self, state: S) -> StateHandle {
        self.issued += 1;
        let handle = StateHandle(format!("s{}", self.issued));
        self.states.insert(handle.clone(), state);
        handle
    }
}

fn handle<E: Environment>(env: &E, store: &mut HandleStore<E::State>, request: Request) -> Response {
    match request {
        Request::Hello { .. } => Response::Hello {
            protocol_version: PROTOCOL_VERSION,
            descriptor: env.descriptor().clone(),
        },
        Request::Reset { id, seed } => match env.reset(seed) {
            Ok((state, observation)) => Response::Reset {
                id,
                handle: store.issue(state),
                observation,
            },
            Err(e) => internal(id, e),
        },
        Request::Step { id, handle, action } => {
            let Some(state) = store.states.get(&handle) else {
                return Response::Error {
                    id: Some(id),
                    code: ErrorCode::StaleHandle,
                    message: format!("unknown handle {handle}"),
                };
            };
            if !env.action_space().contains(&action) {
                return Response::Error {
                    id: Some(id),
                    code: ErrorCode::BadAction,
                    message: format!("action {action:?} is outside the action space"),
                };
            }
            match env.step(state, &action) {
                Ok(out) => Response::Step {
                    id,
                    handle: store.issue(out.next_state),
                    observation: out.observation,
                    reward: out.reward,
                    dead: out.dead,
                    terminal: out.terminal,
                },
                Err(e) => internal(Some(id), e),
            }
        }
        Request::Release { id, handles } => {
            let warnings = handles
                .iter()
                .filter(|h| store.states.remove(h).is_none())
                .map(|h| format!("unknown handle {h}"))
                .collect();
            Response::Release { id, ok: true, warnings }
        }
    }
}

fn internal(id: Option<u64>, e: Error) -> Response {
    Response::Error {
        id,
        code: ErrorCode::Internal,
        message: e.to_string(),
    }
}
