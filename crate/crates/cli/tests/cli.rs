// Copyright 2026 tangleshare contributors
// SPDX-License-Identifier: Apache-2.0

//! Behavioral tests of the binary: exit codes, key-material gating, error
//! messages and file outputs.

use std::path::Path;
use std::process::{Command, Output};

fn run(ws: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tangleshare"))
        .arg("--workspace")
        .arg(ws)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn init(ws: &Path, seed: &str) {
    let out = run(ws, &["init", "--seed", seed]);
    assert!(out.status.success(), "init failed: {}", stderr(&out));
}

#[test]
fn domain_errors_exit_1_and_usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let ws = dir.path();

    // Not yet initialized: domain error.
    let out = run(ws, &["user", "show", "alice"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("not initialized"));

    init(ws, "exit-codes");
    assert_eq!(run(ws, &["user", "new", "alice"]).status.code(), Some(0));
    // Duplicate user: domain error.
    let dup = run(ws, &["user", "new", "alice"]);
    assert_eq!(dup.status.code(), Some(1));
    assert!(stderr(&dup).contains("already registered"));
    // Unknown subcommand: usage error from the parser.
    assert_eq!(run(ws, &["frobnicate"]).status.code(), Some(2));
    // Publish with both a datum and --file: usage error.
    let both = run(ws, &["publish", "alice", "speed", "datum", "--file", "/dev/null"]);
    assert_eq!(both.status.code(), Some(2));
    // Double init: domain error.
    let twice = run(ws, &["init", "--seed", "exit-codes"]);
    assert_eq!(twice.status.code(), Some(1));
    assert!(stderr(&twice).contains("already initialized"));
}

#[test]
fn key_material_is_hidden_unless_revealed() {
    let dir = tempfile::tempdir().unwrap();
    let ws = dir.path();
    init(ws, "reveal-gating");
    run(ws, &["user", "new", "alice"]);

    let shown = stdout(&run(ws, &["user", "show", "alice"]));
    assert!(shown.contains("hidden"));
    assert!(!shown.contains("master key"));

    let revealed = stdout(&run(ws, &["user", "show", "alice", "--reveal"]));
    assert!(revealed.contains("master key"));
    assert!(revealed.contains("signing seed"));

    let json: serde_json::Value =
        serde_json::from_str(&stdout(&run(ws, &["user", "show", "alice", "--json"]))).unwrap();
    assert!(json.get("master_key").is_none());
    assert!(json.get("signing_seed").is_none());

    let json: serde_json::Value = serde_json::from_str(&stdout(&run(
        ws,
        &["user", "show", "alice", "--json", "--reveal"],
    )))
    .unwrap();
    assert!(json.get("master_key").is_some());
}

#[test]
fn fetch_denied_before_purchase_and_granted_after() {
    let dir = tempfile::tempdir().unwrap();
    let ws = dir.path();
    init(ws, "purchase-flow");
    run(ws, &["user", "new", "seller"]);
    run(ws, &["user", "new", "client"]);
    let out = run(ws, &["publish", "seller", "cam", "hello"]);
    assert!(out.status.success(), "{}", stderr(&out));

    let denied = run(ws, &["fetch", "client", "seller", "0"]);
    assert_eq!(denied.status.code(), Some(1));
    assert!(stderr(&denied).contains("denied"));

    assert!(run(ws, &["market", "buy", "client", "seller", "0"]).status.success());
    let granted = run(ws, &["fetch", "client", "seller", "0"]);
    assert_eq!(granted.status.code(), Some(0), "{}", stderr(&granted));
    assert!(stdout(&granted).contains("hello"));
}

#[test]
fn purchase_fails_with_insufficient_funds() {
    let dir = tempfile::tempdir().unwrap();
    let ws = dir.path();
    init(ws, "no-funds");
    run(ws, &["user", "new", "seller"]);
    let out = run(ws, &["user", "new", "pauper", "--grant", "3"]);
    assert!(out.status.success());
    run(ws, &["publish", "seller", "cam", "pricey", "--price", "25"]);

    let buy = run(ws, &["market", "buy", "pauper", "seller", "0"]);
    assert_eq!(buy.status.code(), Some(1));
    assert!(stderr(&buy).contains("insufficient funds"));
}

#[test]
fn bench_accepts_a_scenario_file() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = serde_json::json!({
        "name": "file-run",
        "seed": 7,
        "messages": 5,
        "client": { "name": "PC", "bundle": { "constant": 10.0 }, "rtt": { "constant": 5.0 } },
        "provider": {
            "name": "local",
            "tips": { "constant": 2.0 },
            "pow_rate": 1000.0,
            "availability": 1.0
        },
        "network": { "name": "desk", "difficulty": 8, "payload_max": 1024 }
    });
    let path = dir.path().join("scenario.json");
    std::fs::write(&path, scenario.to_string()).unwrap();

    let out = run(dir.path(), &["bench", "file", path.to_str().unwrap(), "--out",
        dir.path().join("csv").to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("file-run"));
    let records = std::fs::read_to_string(dir.path().join("csv/file-run.csv")).unwrap();
    assert!(records.starts_with("msg_index,bundle_ms,tips_ms,pow_ms,net_ms,total_ms,outcome"));
    assert_eq!(records.lines().count(), 6);
    let hist = std::fs::read_to_string(dir.path().join("csv/file-run-hist.csv")).unwrap();
    assert!(hist.starts_with("bin_start_ms,count"));
}

#[test]
fn workspace_hash_is_stable_until_state_changes() {
    let dir = tempfile::tempdir().unwrap();
    let ws = dir.path();
    init(ws, "hash-stability");
    let h1 = stdout(&run(ws, &["workspace", "hash"]));
    let h2 = stdout(&run(ws, &["workspace", "hash"]));
    assert_eq!(h1, h2);
    run(ws, &["user", "new", "alice"]);
    let h3 = stdout(&run(ws, &["workspace", "hash"]));
    assert_ne!(h1, h3);
}
