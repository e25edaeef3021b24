use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;
use std::process::{Child, Command, Stdio};
use std::thread::JoinHandle;

use super::protocol::{ErrorCode, Request, Response, StateHandle, PROTOCOL_VERSION};
use super::server;
use crate::env::{Action, Environment, EnvironmentDescriptor, StepOutcome};
use crate::{Error, Result};

/// Requests in flight at once when pipelining a batch. Keeps both pipe
/// directions well under typical OS buffer sizes.
const PIPELINE_WINDOW: usize = 64;

/// Acknowledgement of a release request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReleaseAck {
    pub warnings: Vec<String>,
}

struct Session {
    reader: Box<dyn BufRead + Send>,
    writer: Option<Box<dyn Write + Send>>,
    next_id: u64,
    live: BTreeSet<StateHandle>,
}

impl Session {
    fn send(&mut self, request: &Request) -> Result<()> {
        let writer = self.writer.as_mut().expect("writer is present until drop");
        serde_json::to_writer(&mut *writer, request)?;
        writer.write_all(b"\n")?;
        Ok(())
    }

    fn flush(&mut self) -> Result<()> {
        self.writer.as_mut().expect("writer is present until drop").flush()?;
        Ok(())
    }

    fn receive(&mut self) -> Result<Response> {
        let mut line = String::new();
        if self.reader.read_line(&mut line)? == 0 {
            return Err(Error::Protocol {
                message: "connection closed".into(),
                line: String::new(),
            });
        }
        serde_json::from_str(line.trim_end()).map_err(|e| Error::Protocol {
            message: e.to_string(),
            line: line.trim_end().to_string(),
        })
    }

    fn call(&mut self, request: &Request) -> Result<Response> {
        self.send(request)?;
        self.flush()?;
        self.receive()
    }

    fn next_id(&mut self) -> u64 {
        self.next_id += 1;
        self.next_id
    }
}

/// An environment living in another process (or thread), reached over the
/// newline-delimited JSON protocol. Its states are [`StateHandle`]s.
pub struct BridgeEnv {
    descriptor: EnvironmentDescriptor,
    session: RefCell<Session>,
    child: Option<Child>,
    server: Option<JoinHandle<Result<()>>>,
}

impl std::fmt::Debug for BridgeEnv {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BridgeEnv").field("descriptor", &self.descriptor).finish_non_exhaustive()
    }
}

impl BridgeEnv {
    /// Connects to `tcp://host:port` or spawns `exec:<program> [args...]` and talks over its stdio.
    pub fn connect(endpoint: &str) -> Result<Self> {
        if let Some(addr) = endpoint.strip_prefix("tcp://") {
            let stream = TcpStream::connect(addr).map_err(|source| Error::Connection {
                endpoint: endpoint.into(),
                source,
            })?;
            let reader = BufReader::new(stream.try_clone()?);
            Self::over_streams(reader, stream)
        } else if let Some(cmd) = endpoint.strip_prefix("exec:") {
            let mut parts = cmd.split_whitespace();
            let program = parts.next().ok_or_else(|| Error::Config("empty exec endpoint".into()))?;
            let mut child = Command::new(program)
                .args(parts)
                .stdin(Stdio::piped())
                .stdout(Stdio::piped())
                .spawn()
                .map_err(|source| Error::Connection {
                    endpoint: endpoint.into(),
                    source,
                })?;
            let stdin = child.stdin.take().expect("piped stdin");
            let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
            let mut env = Self::over_streams(stdout, stdin)?;
            env.child = Some(child);
            Ok(env)
        } else {
            Err(Error::Config(format!(
                "unknown bridge endpoint {endpoint:?}; expected tcp://host:port or exec:<command>"
            )))
        }
    }

    /// Runs the handshake over an existing duplex stream.
    pub fn over_streams<R, W>(reader: R, writer: W) -> Result<Self>
    where
        R: BufRead + Send + 'static,
        W: Write + Send + 'static,
    {
        let mut session = Session {
            reader: Box::new(reader),
            writer: Some(Box::new(writer)),
            next_id: 0,
            live: BTreeSet::new(),
        };
        let descriptor = match session.call(&Request::Hello {
            protocol_version: PROTOCOL_VERSION,
        })? {
            Response::Hello {
                protocol_version,
                descriptor,
            } if protocol_version == PROTOCOL_VERSION => descriptor,
            Response::Hello { protocol_version, .. } => {
                return Err(Error::Handshake(format!(
                    "server speaks protocol version {protocol_version}, client speaks {PROTOCOL_VERSION}"
                )))
            }
            Response::Error { message, .. } => return Err(Error::Handshake(message)),
            other => return Err(Error::Handshake(format!("expected hello, got {other:?}"))),
        };
        descriptor.action_space.validate()?;
        Ok(Self {
            descriptor,
            session: RefCell::new(session),
            child: None,
            server: None,
        })
    }

    /// Serves `env` from a background thread over in-memory pipes and connects to it.
    pub fn loopback<E>(env: E) -> Result<Self>
    where
        E: Environment + Send + 'static,
    {
        let (to_server_rx, to_server_tx) = std::io::pipe()?;
        let (to_client_rx, to_client_tx) = std::io::pipe()?;
        let server = std::thread::spawn(move || server::serve(&env, BufReader::new(to_server_rx), to_client_tx));
        let mut bridge = Self::over_streams(BufReader::new(to_client_rx), to_server_tx)?;
        bridge.server = Some(server);
        Ok(bridge)
    }

    /// Frees `handles` on the simulator. Unknown handles come back as warnings.
    pub fn release(&self, handles: &[StateHandle]) -> Result<ReleaseAck> {
        let mut session = self.session.borrow_mut();
        let id = session.next_id();
        let response = session.call(&Request::Release {
            id: Some(id),
            handles: handles.to_vec(),
        })?;
        for h in handles {
            session.live.remove(h);
        }
        match response {
            Response::Release { warnings, .. } => Ok(ReleaseAck { warnings }),
            Response::Error { code, message, .. } => Err(remote_error(code, message)),
            other => Err(unexpected("release", &other)),
        }
    }

    /// Handles issued to this client and not yet released.
    pub fn live_handles(&self) -> usize {
        self.session.borrow().live.len()
    }
}

impl Drop for BridgeEnv {
    fn drop(&mut self) {
        // Closing our write side ends the server loop.
        self.session.get_mut().writer.take();
        if let Some(mut child) = self.child.take() {
            let _ = child.wait();
        }
        if let Some(server) = self.server.take() {
            let _ = server.join();
        }
    }
}

fn remote_error(code: ErrorCode, message: String) -> Error {
    match code {
        ErrorCode::StaleHandle => Error::StaleHandle(message),
        ErrorCode::BadAction => Error::Contract(message),
        _ => Error::Remote {
            code: code.as_str().into(),
            message,
        },
    }
}

fn unexpected(what: &str, response: &Response) -> Error {
    Error::Protocol {
        message: format!("unexpected response to {what}"),
        line: serde_json::to_string(response).unwrap_or_default(),
    }
}

impl Environment for BridgeEnv {
    type State = StateHandle;

    fn descriptor(&self) -> &EnvironmentDescriptor {
        &self.descriptor
    }

    fn reset(&self, seed: u64) -> Result<(StateHandle, Vec<f64>)> {
        let mut session = self.session.borrow_mut();
        let id = session.next_id();
        match session.call(&Request::Reset { id: Some(id), seed })? {
            Response::Reset { handle, observation, .. } => {
                session.live.insert(handle.clone());
                Ok((handle, observation))
            }
            Response::Error { code, message, .. } => Err(remote_error(code, message)),
            other => Err(unexpected("reset", &other)),
        }
    }

    fn step(&self, state: &StateHandle, action: &Action) -> Result<StepOutcome<StateHandle>> {
        let mut out = self.step_batch(&[(state, action)])?;
        Ok(out.pop().expect("one outcome per request"))
    }

    /// Pipelines the batch: a window of requests is written before any response is read.
    fn step_batch(&self, batch: &[(&StateHandle, &Action)]) -> Result<Vec<StepOutcome<StateHandle>>> {
        let mut session = self.session.borrow_mut();
        let mut outcomes = Vec::with_capacity(batch.len());
        for window in batch.chunks(PIPELINE_WINDOW) {
            let mut ids = Vec::with_capacity(window.len());
            for (handle, action) in window {
                let id = session.next_id();
                ids.push(id);
                session.send(&Request::Step {
                    id,
                    handle: (*handle).clone(),
                    action: (*action).clone(),
                })?;
            }
            session.flush()?;

            let mut by_id = HashMap::with_capacity(window.len());
            let mut failure = None;
            for _ in 0..window.len() {
                match session.receive()? {
                    Response::Step {
                        id,
                        handle,
                        observation,
                        reward,
                        dead,
                        terminal,
                    } => {
                        session.live.insert(handle.clone());
                        by_id.insert(
                            id,
                            StepOutcome {
                                next_state: handle,
                                observation,
                                reward,
                                dead,
                                terminal,
                            },
                        );
                    }
                    Response::Error { code, message, .. } => {
                        failure.get_or_insert(remote_error(code, message));
                    }
                    other => {
                        failure.get_or_insert(unexpected("step", &other));
                    }
                }
            }
            if let Some(e) = failure {
                return Err(e);
            }
            for id in ids {
                let out = by_id.remove(&id).ok_or_else(|| Error::Protocol {
                    message: format!("no response for request {id}"),
                    line: String::new(),
                })?;
                outcomes.push(out);
            }
        }
        Ok(outcomes)
    }

    fn retain_only(&self, keep: &[StateHandle]) -> Result<()> {
        let stale: Vec<StateHandle> = {
            let session = self.session.borrow();
            session.live.iter().filter(|h| !keep.contains(h)).cloned().collect()
        };
        if stale.is_empty() {
            return Ok(());
        }
        self.release(&stale).map(|_| ())
    }
}
