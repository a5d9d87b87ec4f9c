// Copyright 2026 tangleshare contributors
// SPDX-License-Identifier: Apache-2.0

//! Off-ledger data plane: a content-addressed object store for payloads too
//! large to inline, and a hierarchical publish/subscribe bus for local
//! fan-out of fresh data.

mod bus;
mod objects;

pub use bus::{Bus, BusError, Event, Subscription, Topic};
pub use objects::{
    open_object, resolve, seal_object, stash, ObjectStore, StoreError, INLINE_MAX_DEFAULT,
};
