// Copyright 2026 tangleshare contributors
// SPDX-License-Identifier: Apache-2.0

use std::path::Path;

use serde_json::json;

use tangleshare::contracts::{ItemRef, Op};

use crate::commands::print_json;
use crate::error::{CliError, CliResult};
use crate::workspace::Workspace;

pub fn list(root: &Path, owner: &str, json: bool) -> CliResult {
    let ws = Workspace::load(root)?;
    let address = ws.resolve_address(owner)?;
    let feature = ws
        .machine
        .feature_of_owner(&address)
        .ok_or_else(|| CliError::NoContract(owner.to_string()))?;
    if json {
        return print_json(feature);
    }
    println!("contract {} owned by {}", feature.contract_id, feature.owner);
    if feature.catalog.is_empty() {
        println!("  (no bundles listed)");
    }
    for bundle in feature.catalog.values() {
        println!("  bundle {} — price {}", bundle.id, bundle.price);
        for item in &bundle.items {
            match item {
                ItemRef::Tx { address } => println!("    message at {address}"),
                ItemRef::Channel { channel_kind, entry_root } => {
                    println!("    {channel_kind:?} channel {entry_root}")
                }
            }
        }
        let buyers = feature.acl.iter().filter(|(_, ids)| ids.contains(&bundle.id)).count();
        if buyers > 0 {
            println!("    granted to {buyers} buyer(s)");
        }
    }
    Ok(())
}

pub fn buy(root: &Path, buyer: &str, owner: &str, bundle: u64, json: bool) -> CliResult {
    let mut ws = Workspace::load(root)?;
    let buyer_addr = ws.resolve_address(buyer)?;
    let owner_addr = ws.resolve_address(owner)?;
    let contract_id = ws
        .machine
        .feature_of_owner(&owner_addr)
        .ok_or_else(|| CliError::NoContract(owner.to_string()))?
        .contract_id;
    ws.machine.apply(Op::PurchaseAccess { buyer: buyer_addr, contract_id, bundle_id: bundle })?;
    ws.save()?;
    let balance = ws.machine.balance_of(&buyer_addr);
    if json {
        print_json(&json!({
            "buyer": buyer_addr,
            "contract_id": contract_id,
            "bundle": bundle,
            "balance": balance,
        }))
    } else {
        println!("purchased bundle {bundle} of contract {contract_id}");
        println!("buyer balance is now {balance}");
        Ok(())
    }
}
