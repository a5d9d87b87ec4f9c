// Copyright 2026 tangleshare contributors
// SPDX-License-Identifier: Apache-2.0

pub mod bench;
pub mod fetch;
pub mod init;
pub mod market;
pub mod paychan;
pub mod pol;
pub mod publish;
pub mod serve;
pub mod user;

use crate::error::CliResult;

/// Print a serializable value as pretty JSON (for `--json` output paths).
pub fn print_json<T: serde::Serialize>(value: &T) -> CliResult {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}
