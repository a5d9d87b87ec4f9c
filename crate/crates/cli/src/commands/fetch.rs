// Copyright 2026 tangleshare contributors
// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::Path;

use serde_json::json;

use tangleshare::authsvc::{AuthClient, DenialReason, ItemResult, KeyRequest};
use tangleshare::crypto::{sha256, Digest};
use tangleshare::mam;
use tangleshare::payload::Payload;
use tangleshare::store::resolve;

use crate::commands::print_json;
use crate::error::{CliError, CliResult};
use crate::workspace::Workspace;
use crate::FetchArgs;

pub fn run(root: &Path, args: &FetchArgs, json: bool) -> CliResult {
    let ws = Workspace::load(root)?;
    let buyer = ws.user(&args.buyer)?;
    let owner_addr = ws.resolve_address(&args.owner)?;
    let feature = ws
        .machine
        .feature_of_owner(&owner_addr)
        .ok_or_else(|| CliError::NoContract(args.owner.clone()))?;
    let bundle = feature
        .catalog
        .get(&args.bundle)
        .ok_or(CliError::UnknownBundle(args.bundle))?;

    let request = KeyRequest::new_signed(&buyer.signing_key(), bundle.items.clone());
    let response = match &args.remote {
        Some(addr) => AuthClient::connect(addr.as_str())?.request_keys(request)?,
        None => ws.auth_service()?.handle_key_request(&ws.tangle, &ws.machine, &request)?,
    };

    let mut keys: Vec<(Digest, [u8; 32])> = Vec::new();
    for result in response.results {
        match result {
            ItemResult::TxKey { root, key, .. } => keys.push((root, key)),
            ItemResult::ChannelKeys { keys: granted, .. } => {
                keys.extend(granted.into_iter().map(|k| (k.root, k.key)))
            }
            ItemResult::Denied { reason, .. } => {
                return Err(CliError::Denied(match reason {
                    DenialReason::AccessDenied => {
                        "no grant for this item; purchase the bundle first".into()
                    }
                    DenialReason::UnknownItem => "item is not known to the service".into(),
                }))
            }
        }
    }

    if let Some(dir) = &args.out {
        fs::create_dir_all(dir)?;
    }
    let mut messages = Vec::new();
    for (i, (msg_root, key)) in keys.iter().enumerate() {
        let msg = mam::fetch_with_message_key(&ws.tangle, msg_root, key)?;
        let (kind, bytes) = match &msg.payload {
            Payload::Inline(_) => ("inline", resolve(&ws.store, key, &msg.payload)?),
            Payload::ObjectRef(_) => ("object-ref", resolve(&ws.store, key, &msg.payload)?),
            Payload::Certificate(bytes) => ("certificate", bytes.clone()),
            Payload::ChannelRef { .. } => ("channel-ref", msg.payload.encode()),
            Payload::TxAddress(_) => ("tx-address", msg.payload.encode()),
        };
        let path = match &args.out {
            Some(dir) => {
                let path = dir.join(format!("msg-{i}.bin"));
                fs::write(&path, &bytes)?;
                Some(path)
            }
            None => None,
        };
        if json {
            messages.push(json!({
                "index": i,
                "root": msg_root,
                "payload": kind,
                "size": bytes.len(),
                "sha256": sha256(&[&bytes]),
                "utf8": std::str::from_utf8(&bytes).ok(),
                "path": path,
            }));
        } else {
            let preview = match std::str::from_utf8(&bytes) {
                Ok(text) if text.len() <= 64 => format!("{text:?}"),
                _ => format!("sha256 {}", sha256(&[&bytes])),
            };
            match &path {
                Some(p) => println!(
                    "message {i}: {kind}, {} bytes -> {} ({preview})",
                    bytes.len(),
                    p.display()
                ),
                None => println!("message {i}: {kind}, {} bytes ({preview})", bytes.len()),
            }
        }
    }
    if json {
        print_json(&json!({
            "buyer": buyer.address,
            "bundle": args.bundle,
            "messages": messages,
        }))?;
    } else if keys.is_empty() {
        println!("bundle {} grants access but no messages exist yet", args.bundle);
    }
    Ok(())
}
