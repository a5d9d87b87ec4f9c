// Copyright 2026 tangleshare contributors
// SPDX-License-Identifier: Apache-2.0

use std::path::Path;

use serde_json::json;

use crate::commands::print_json;
use crate::error::CliResult;
use crate::workspace::Workspace;

pub fn new(root: &Path, name: &str, grant: u64, json: bool) -> CliResult {
    let mut ws = Workspace::load(root)?;
    let user = ws.create_user(name, grant)?.clone();
    ws.save()?;
    let balance = ws.machine.balance_of(&user.address);
    if json {
        print_json(&json!({
            "name": user.name,
            "address": user.address,
            "balance": balance,
            "contract_id": user.contract_id,
            "index_root": user.index.entry_root(),
        }))
    } else {
        println!("created user {}", user.name);
        println!("  address     {}", user.address);
        println!("  balance     {balance}");
        println!("  contract    {}", user.contract_id);
        println!("  index root  {}", user.index.entry_root());
        Ok(())
    }
}

pub fn show(root: &Path, name: &str, reveal: bool, json: bool) -> CliResult {
    let ws = Workspace::load(root)?;
    let user = ws.user(name)?;
    let balance = ws.machine.balance_of(&user.address);
    let features: Vec<_> = user
        .features
        .iter()
        .map(|(feature, channel)| {
            json!({
                "feature": feature,
                "entry_root": channel.entry_root(),
                "messages": channel.next_index(),
                "bundle": user.feature_bundles.get(feature),
            })
        })
        .collect();
    if json {
        let mut out = json!({
            "name": user.name,
            "address": user.address,
            "balance": balance,
            "contract_id": user.contract_id,
            "index_root": user.index.entry_root(),
            "features": features,
        });
        if reveal {
            out["signing_seed"] = json!(hex::encode(user.signing_seed));
            out["master_key"] = json!(hex::encode(user.master_key));
        }
        print_json(&out)
    } else {
        println!("user {}", user.name);
        println!("  address     {}", user.address);
        println!("  balance     {balance}");
        println!("  contract    {}", user.contract_id);
        println!("  index root  {}", user.index.entry_root());
        for f in &features {
            println!(
                "  feature {} -> channel {} ({} messages, bundle {})",
                f["feature"].as_str().unwrap_or_default(),
                f["entry_root"].as_str().unwrap_or_default(),
                f["messages"],
                f["bundle"]
            );
        }
        if reveal {
            println!("  signing seed {}", hex::encode(user.signing_seed));
            println!("  master key   {}", hex::encode(user.master_key));
        } else {
            println!("  (key material hidden; pass --reveal to print it)");
        }
        Ok(())
    }
}
