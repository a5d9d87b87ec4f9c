// Copyright 2026 tangleshare contributors
// SPDX-License-Identifier: Apache-2.0

//! Deterministic smart-contract emulation: a token ledger, feature
//! contracts with purchasable data bundles and per-buyer access-control
//! lists, and unidirectional micropayment channels settled on the token
//! ledger.
//!
//! All mutating operations flow through [`Machine::apply`] and are recorded
//! in an append-only log; replaying the log from genesis reproduces the
//! exact state, hash for hash.

mod machine;
mod micropay;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use crate::crypto::Address;
use crate::crypto::Digest;
use crate::mam::ChannelKind;
pub use machine::{Applied, Genesis, LogEntry, Machine, Op, State, DEFAULT_CHALLENGE_PERIOD};
pub use micropay::{BalanceProof, Micropayer};

#[derive(Debug, Error)]
pub enum ContractError {
    #[error("address {0} has no token account")]
    UnknownAddress(Address),
    #[error("address {0} already deployed a feature contract")]
    DuplicateRegistration(Address),
    #[error("unknown contract {0}")]
    UnknownContract(Digest),
    #[error("contract has no bundle {0}")]
    UnknownBundle(u64),
    #[error("bundle ids must be distinct within a contract")]
    DuplicateBundleId(u64),
    #[error("a data bundle must list at least one item")]
    EmptyBundleItems,
    #[error("bundle {0} already granted to this buyer")]
    AlreadyGranted(u64),
    #[error("insufficient funds: need {need}, have {have}")]
    InsufficientFunds { need: u64, have: u64 },
    #[error("unknown payment channel {0}")]
    UnknownChannel(u64),
    #[error("cumulative payment would exceed the channel deposit")]
    ExceedsDeposit,
    #[error("invalid balance proof: {0}")]
    InvalidProof(&'static str),
    #[error("challenge period still running")]
    ChallengePending,
    #[error("challenge period has expired")]
    ChallengeExpired,
    #[error("channel already settled")]
    AlreadySettled,
    #[error("only the channel payer or payee may do this")]
    NotAParty,
    #[error("only the contract owner may do this")]
    NotOwner,
    #[error("malformed operation log: {0}")]
    BadLog(String),
}

/// Something a bundle can grant access to: a single channel message by
/// ledger address, or a whole channel by its entry root.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ItemRef {
    Tx { address: Digest },
    Channel { channel_kind: ChannelKind, entry_root: Digest },
}

impl ItemRef {
    /// Canonical binary form, used wherever item lists are signed.
    pub fn write_to(&self, w: &mut crate::codec::Writer) {
        match self {
            ItemRef::Tx { address } => {
                w.put_u8(0).put_digest(address);
            }
            ItemRef::Channel { channel_kind, entry_root } => {
                w.put_u8(1).put_u8(channel_kind.tag()).put_digest(entry_root);
            }
        }
    }
}

/// A priced set of item references inside a feature contract's catalog.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataBundle {
    pub id: u64,
    pub items: Vec<ItemRef>,
    pub price: u64,
}

/// On-chain record of one provider's purchasable data: a catalog of bundles
/// plus the list of grants per buyer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureContract {
    pub contract_id: Digest,
    pub owner: Address,
    pub catalog: std::collections::BTreeMap<u64, DataBundle>,
    pub acl: std::collections::BTreeMap<Address, std::collections::BTreeSet<u64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ChannelStatus {
    Open,
    Closing { deadline: u64 },
    Settled,
}

/// A unidirectional micropayment channel: the payer escrows a deposit up
/// front, pays off-chain with signed cumulative balance proofs, and the
/// channel settles on-chain once.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaymentChannel {
    pub channel_id: u64,
    pub payer: Address,
    pub payee: Address,
    pub deposit: u64,
    pub status: ChannelStatus,
    pub best_proof: Option<BalanceProof>,
}

/// Resolves whether a ledger address belongs to a channel, for access
/// checks on channel-wide grants. The contract state cannot decide this by
/// itself because walking a channel requires its keys.
pub trait ChannelResolver {
    fn channel_contains(&self, entry_root: &Digest, address: &Digest) -> bool;
}

/// Resolver that never matches: channel grants then cover only exact
/// channel references, not individual messages inside.
pub struct NoResolver;

impl ChannelResolver for NoResolver {
    fn channel_contains(&self, _entry_root: &Digest, _address: &Digest) -> bool {
        false
    }
}
