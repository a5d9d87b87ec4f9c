// Copyright 2026 tangleshare contributors
// SPDX-License-Identifier: Apache-2.0

use std::net::TcpListener;
use std::path::Path;
use std::sync::Arc;

use tangleshare::authsvc::{serve, ServerContext};

use crate::error::CliResult;
use crate::workspace::Workspace;

/// Serve key-release requests until killed. The service is rebuilt from
/// the workspace on startup; restarting it gives identical answers.
pub fn run(root: &Path, addr: &str) -> CliResult {
    let ws = Workspace::load(root)?;
    let service = ws.auth_service()?;
    let ctx = ServerContext { service, tangle: ws.tangle, machine: ws.machine };
    let listener = TcpListener::bind(addr)?;
    eprintln!("key-release service listening on {}", listener.local_addr()?);
    serve(listener, Arc::new(ctx))?;
    Ok(())
}
