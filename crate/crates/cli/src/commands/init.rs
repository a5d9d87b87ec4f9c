// Copyright 2026 tangleshare contributors
// SPDX-License-Identifier: Apache-2.0

use std::path::Path;

use serde_json::json;

use tangleshare::ledger::NetworkConfig;

use crate::commands::print_json;
use crate::error::CliResult;
use crate::workspace::{seed_from_arg, Workspace, DEFAULT_SUPPLY};

pub fn run(root: &Path, seed_arg: Option<&str>, network: NetworkConfig, json: bool) -> CliResult {
    let seed = seed_from_arg(seed_arg);
    let ws = Workspace::init(root, seed, network)?;
    let hash = ws.state_hash()?;
    if json {
        print_json(&json!({
            "workspace": ws.root,
            "network": ws.meta.network,
            "treasury": ws.treasury(),
            "supply": DEFAULT_SUPPLY,
            "state_hash": hash,
        }))
    } else {
        println!("initialized workspace at {}", ws.root.display());
        println!(
            "network {} (difficulty {}), treasury {} holds {} tokens",
            ws.meta.network.name, ws.meta.network.difficulty, ws.treasury(), DEFAULT_SUPPLY
        );
        println!("state hash {hash}");
        Ok(())
    }
}

pub fn hash(root: &Path, json: bool) -> CliResult {
    let ws = Workspace::load(root)?;
    let hash = ws.state_hash()?;
    if json {
        print_json(&json!({ "state_hash": hash }))
    } else {
        println!("{hash}");
        Ok(())
    }
}
