// Copyright 2026 tangleshare contributors
// SPDX-License-Identifier: Apache-2.0

//! Client/server transport for the key-release service: length-prefixed
//! JSON frames over TCP. The same handler also serves in-process callers,
//! so tests and the single-machine path skip the socket entirely.

use std::io::{self, Read, Write};
use std::net::{TcpListener, TcpStream, ToSocketAddrs};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::contracts::Machine;
use crate::ledger::Tangle;

use super::{AuthError, AuthService, KeyRequest, KeyResponse, UserRegistration};

/// Frames larger than this are refused; keys and proofs are tiny.
const MAX_FRAME: u32 = 16 * 1024 * 1024;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum WireRequest {
    Register { registration: UserRegistration },
    Keys { request: KeyRequest },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum WireResponse {
    Registered,
    Keys { response: KeyResponse },
    Error { message: String },
}

fn write_frame(stream: &mut impl Write, bytes: &[u8]) -> io::Result<()> {
    stream.write_all(&(bytes.len() as u32).to_be_bytes())?;
    stream.write_all(bytes)?;
    stream.flush()
}

/// Read one frame; `None` on clean end-of-stream.
fn read_frame(stream: &mut impl Read) -> io::Result<Option<Vec<u8>>> {
    let mut len_bytes = [0u8; 4];
    match stream.read_exact(&mut len_bytes) {
        Ok(()) => {}
        Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => return Ok(None),
        Err(e) => return Err(e),
    }
    let len = u32::from_be_bytes(len_bytes);
    if len > MAX_FRAME {
        return Err(io::Error::new(io::ErrorKind::InvalidData, "frame too large"));
    }
    let mut frame = vec![0u8; len as usize];
    stream.read_exact(&mut frame)?;
    Ok(Some(frame))
}

/// Everything a running service needs to answer requests. The contract
/// state and ledger are read-only snapshots from the serving workspace.
pub struct ServerContext {
    pub service: AuthService,
    pub tangle: Tangle,
    pub machine: Machine,
}

impl ServerContext {
    /// Dispatch one request; shared by the TCP loop and in-process callers.
    pub fn handle(&self, request: WireRequest) -> WireResponse {
        match request {
            WireRequest::Register { registration } => {
                match self.service.register(&self.machine, &registration) {
                    Ok(()) => WireResponse::Registered,
                    Err(e) => WireResponse::Error { message: e.to_string() },
                }
            }
            WireRequest::Keys { request } => {
                match self.service.handle_key_request(&self.tangle, &self.machine, &request) {
                    Ok(response) => WireResponse::Keys { response },
                    Err(e) => WireResponse::Error { message: e.to_string() },
                }
            }
        }
    }
}

fn handle_connection(mut stream: TcpStream, ctx: &ServerContext) -> io::Result<()> {
    while let Some(frame) = read_frame(&mut stream)? {
        let response = match serde_json::from_slice::<WireRequest>(&frame) {
            Ok(request) => ctx.handle(request),
            Err(e) => WireResponse::Error { message: format!("bad request: {e}") },
        };
        let bytes = serde_json::to_vec(&response).expect("response serializes");
        write_frame(&mut stream, &bytes)?;
    }
    Ok(())
}

/// Accept connections forever, one thread per client.
pub fn serve(listener: TcpListener, ctx: Arc<ServerContext>) -> io::Result<()> {
    for stream in listener.incoming() {
        let stream = stream?;
        let ctx = Arc::clone(&ctx);
        std::thread::spawn(move || {
            let _ = handle_connection(stream, &ctx);
        });
    }
    Ok(())
}

/// Blocking client for a remote service.
pub struct AuthClient {
    stream: TcpStream,
}

impl AuthClient {
    pub fn connect(addr: impl ToSocketAddrs) -> io::Result<Self> {
        Ok(Self { stream: TcpStream::connect(addr)? })
    }

    fn round_trip(&mut self, request: &WireRequest) -> Result<WireResponse, AuthError> {
        let bytes = serde_json::to_vec(request).expect("request serializes");
        write_frame(&mut self.stream, &bytes)?;
        let frame = read_frame(&mut self.stream)?
            .ok_or_else(|| AuthError::Protocol("server closed the connection".into()))?;
        serde_json::from_slice(&frame).map_err(|e| AuthError::Protocol(e.to_string()))
    }

    pub fn register(&mut self, registration: UserRegistration) -> Result<(), AuthError> {
        match self.round_trip(&WireRequest::Register { registration })? {
            WireResponse::Registered => Ok(()),
            WireResponse::Error { message } => Err(AuthError::Remote(message)),
            other => Err(AuthError::Protocol(format!("unexpected response: {other:?}"))),
        }
    }

    pub fn request_keys(&mut self, request: KeyRequest) -> Result<KeyResponse, AuthError> {
        match self.round_trip(&WireRequest::Keys { request })? {
            WireResponse::Keys { response } => Ok(response),
            WireResponse::Error { message } => Err(AuthError::Remote(message)),
            other => Err(AuthError::Protocol(format!("unexpected response: {other:?}"))),
        }
    }
}
