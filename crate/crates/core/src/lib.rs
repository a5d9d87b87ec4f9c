// Copyright 2026 tangleshare contributors
// SPDX-License-Identifier: Apache-2.0

//! Building blocks for a distributed-ledger based data sharing infrastructure
//! for smart transportation systems.
//!
//! The crate provides an in-process DAG ledger with tip selection and
//! proof-of-work ([`ledger`]), masked authenticated messaging channels layered
//! on top of it ([`mam`]), a content-addressed object store and a hierarchical
//! publish/subscribe bus ([`store`]), a deterministic smart-contract emulation
//! with token transfers, access-control lists and micropayment state channels
//! ([`contracts`]), a key-release authentication service ([`authsvc`]),
//! proof-of-location primitives ([`pol`]) and a discrete-event latency
//! simulator ([`simbench`]).

pub mod authsvc;
pub mod codec;
pub mod contracts;
pub mod crypto;
pub mod ledger;
pub mod mam;
pub mod payload;
pub mod pol;
pub mod simbench;
pub mod store;

pub use crypto::{Address, Digest};
pub use payload::Payload;
