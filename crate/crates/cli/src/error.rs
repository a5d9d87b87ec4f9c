// Copyright 2026 tangleshare contributors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use thiserror::Error;

use tangleshare::authsvc::AuthError;
use tangleshare::contracts::ContractError;
use tangleshare::ledger::LedgerError;
use tangleshare::mam::MamError;
use tangleshare::pol::PolError;
use tangleshare::simbench::SimError;
use tangleshare::store::{BusError, StoreError};

/// Anything a command can fail with. `Usage` maps to exit code 2, every
/// other variant to exit code 1.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("workspace at {} is not initialized; run `tangleshare init` first", .0.display())]
    NotInitialized(PathBuf),
    #[error("workspace at {} is already initialized", .0.display())]
    AlreadyInitialized(PathBuf),
    #[error("no user named {0:?} in this workspace")]
    UnknownUser(String),
    #[error("user {0:?} is already registered in this workspace")]
    DuplicateUser(String),
    #[error("{0:?} is neither a local user name nor a 40-digit hex address")]
    BadAddress(String),
    #[error("no feature contract deployed by {0}")]
    NoContract(String),
    #[error("contract has no bundle {0}")]
    UnknownBundle(u64),
    #[error("key release denied: {0}")]
    Denied(String),
    #[error("payment channel {0} is not tracked in this workspace")]
    UnknownPaychan(u64),
    #[error("workspace file {file} is corrupt: {detail}")]
    Corrupt { file: String, detail: String },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error(transparent)]
    Mam(#[from] MamError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Bus(#[from] BusError),
    #[error(transparent)]
    Contract(#[from] ContractError),
    #[error(transparent)]
    Auth(#[from] AuthError),
    #[error(transparent)]
    Pol(#[from] PolError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type CliResult<T = ()> = Result<T, CliError>;
