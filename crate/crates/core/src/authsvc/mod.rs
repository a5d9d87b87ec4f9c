// Copyright 2026 tangleshare contributors
// SPDX-License-Identifier: Apache-2.0

//! The key-release service. Data owners register their master key, index
//! channel and feature contract; buyers ask for decryption keys, and the
//! service releases exactly the keys their contract grants cover.
//!
//! Every released key is `SHA-256(side_key ‖ message_root)` — the message
//! decryption key — so possession of a released key unlocks one message and
//! nothing else. Channel-wide grants enumerate the per-message keys of the
//! messages currently in the channel instead of revealing the side key, so
//! future messages are not implicitly included.
//!
//! The service holds no state beyond registrations: channel walks are
//! recomputed from the ledger per request, so a restarted service gives
//! identical answers.

mod wire;

use std::collections::BTreeMap;

use parking_lot::RwLock;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::Writer;
use crate::contracts::{ChannelResolver, ItemRef, Machine};
use crate::crypto::{derive_key, sign, verify_signature, Address, Digest};
use crate::ledger::Tangle;
use crate::mam::{self, Channel, ChannelKind};

pub use wire::{serve, AuthClient, ServerContext, WireRequest, WireResponse};

/// Upper bound on messages walked per channel.
const MAX_WALK: usize = 10_000;

#[derive(Debug, Error)]
pub enum AuthError {
    #[error("signature check failed")]
    BadSignature,
    #[error("unknown or foreign contract {0}")]
    UnknownContract(Digest),
    #[error("transport: {0}")]
    Io(#[from] std::io::Error),
    #[error("protocol: {0}")]
    Protocol(String),
    #[error("server error: {0}")]
    Remote(String),
}

/// A data owner handing the service what it needs to release keys: the
/// master key and the entry to the index channel listing all their
/// channels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserRegistration {
    pub owner: Address,
    #[serde(with = "hex::serde")]
    pub master_key: [u8; 32],
    pub index_root: Digest,
    pub contract_id: Digest,
    #[serde(with = "hex::serde")]
    pub owner_pubkey: [u8; 32],
    #[serde(with = "hex::serde")]
    pub signature: [u8; 64],
}

impl UserRegistration {
    fn signed_bytes(
        owner: &Address,
        master_key: &[u8; 32],
        index_root: &Digest,
        contract_id: &Digest,
    ) -> Vec<u8> {
        let mut w = Writer::new();
        w.put_address(owner).put_raw(master_key).put_digest(index_root).put_digest(contract_id);
        w.finish()
    }

    pub fn new_signed(
        owner_key: &ed25519_dalek::SigningKey,
        master_key: [u8; 32],
        index_root: Digest,
        contract_id: Digest,
    ) -> Self {
        let owner = Address::of_key(&owner_key.verifying_key());
        let bytes = Self::signed_bytes(&owner, &master_key, &index_root, &contract_id);
        UserRegistration {
            owner,
            master_key,
            index_root,
            contract_id,
            owner_pubkey: owner_key.verifying_key().to_bytes(),
            signature: sign(owner_key, &bytes),
        }
    }

    pub fn verify(&self) -> bool {
        if Address::of_key_bytes(&self.owner_pubkey) != self.owner {
            return false;
        }
        let bytes =
            Self::signed_bytes(&self.owner, &self.master_key, &self.index_root, &self.contract_id);
        verify_signature(&self.owner_pubkey, &bytes, &self.signature)
    }
}

/// A signed list of items the requester wants keys for.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyRequest {
    pub requester: Address,
    #[serde(with = "hex::serde")]
    pub requester_pubkey: [u8; 32],
    pub items: Vec<ItemRef>,
    #[serde(with = "hex::serde")]
    pub signature: [u8; 64],
}

impl KeyRequest {
    fn signed_bytes(requester: &Address, items: &[ItemRef]) -> Vec<u8> {
        let mut w = Writer::new();
        w.put_address(requester).put_u32(items.len() as u32);
        for item in items {
            item.write_to(&mut w);
        }
        w.finish()
    }

    pub fn new_signed(requester_key: &ed25519_dalek::SigningKey, items: Vec<ItemRef>) -> Self {
        let requester = Address::of_key(&requester_key.verifying_key());
        let bytes = Self::signed_bytes(&requester, &items);
        KeyRequest {
            requester,
            requester_pubkey: requester_key.verifying_key().to_bytes(),
            items,
            signature: sign(requester_key, &bytes),
        }
    }

    pub fn verify(&self) -> bool {
        if Address::of_key_bytes(&self.requester_pubkey) != self.requester {
            return false;
        }
        let bytes = Self::signed_bytes(&self.requester, &self.items);
        verify_signature(&self.requester_pubkey, &bytes, &self.signature)
    }
}

/// Decryption key for the message at `root`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessageKey {
    pub root: Digest,
    #[serde(with = "hex::serde")]
    pub key: [u8; 32],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DenialReason {
    AccessDenied,
    UnknownItem,
}

/// Per-item answer: a key, a set of keys, or a denial.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum ItemResult {
    TxKey { item: ItemRef, root: Digest, #[serde(with = "hex::serde")] key: [u8; 32] },
    ChannelKeys { item: ItemRef, entry_root: Digest, keys: Vec<MessageKey> },
    Denied { item: ItemRef, reason: DenialReason },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyResponse {
    pub results: Vec<ItemResult>,
}

#[derive(Clone)]
struct RegisteredUser {
    master_key: [u8; 32],
    index_root: Digest,
    contract_id: Digest,
}

/// One message as the service sees it while walking a channel.
struct MessageView {
    root: Digest,
    address: Digest,
}

/// One channel listed in a user's index, with the side key the service
/// uses to read it.
struct ChannelView {
    entry_root: Digest,
    side_key: [u8; 32],
    messages: Vec<MessageView>,
}

struct ViewsResolver<'a> {
    views: &'a [ChannelView],
}

impl ChannelResolver for ViewsResolver<'_> {
    fn channel_contains(&self, entry_root: &Digest, address: &Digest) -> bool {
        self.views
            .iter()
            .find(|v| v.entry_root == *entry_root)
            .is_some_and(|v| v.messages.iter().any(|m| m.address == *address))
    }
}

#[derive(Default)]
pub struct AuthService {
    users: RwLock<BTreeMap<Address, RegisteredUser>>,
}

impl AuthService {
    pub fn new() -> Self {
        Self::default()
    }

    /// Accept a registration after checking its signature and that the
    /// referenced contract really belongs to the signer.
    pub fn register(&self, machine: &Machine, reg: &UserRegistration) -> Result<(), AuthError> {
        if !reg.verify() {
            return Err(AuthError::BadSignature);
        }
        let owned = machine.feature(&reg.contract_id).is_some_and(|f| f.owner == reg.owner);
        if !owned {
            return Err(AuthError::UnknownContract(reg.contract_id));
        }
        self.users.write().insert(
            reg.owner,
            RegisteredUser {
                master_key: reg.master_key,
                index_root: reg.index_root,
                contract_id: reg.contract_id,
            },
        );
        Ok(())
    }

    pub fn is_registered(&self, owner: &Address) -> bool {
        self.users.read().contains_key(owner)
    }

    /// Walk one user's index channel and every channel it lists. Feature
    /// channels are public (zero side key); session and index channels are
    /// read with the owner's master key.
    fn channels_of(&self, tangle: &Tangle, user: &RegisteredUser) -> Vec<ChannelView> {
        let mut views = Vec::new();
        let index_msgs = match mam::follow(tangle, &user.index_root, &user.master_key, MAX_WALK) {
            Ok(msgs) => msgs,
            Err(_) => return views,
        };
        for entry in index_msgs {
            let crate::payload::Payload::ChannelRef { kind, root } = entry.payload else {
                continue;
            };
            let side_key = match kind {
                ChannelKind::Feature => Channel::public_side_key(),
                ChannelKind::Session | ChannelKind::Index => user.master_key,
            };
            let messages = mam::follow(tangle, &root, &side_key, MAX_WALK)
                .map(|msgs| {
                    msgs.into_iter()
                        .map(|m| MessageView { root: m.root, address: mam::address_of(&m.root) })
                        .collect()
                })
                .unwrap_or_default();
            views.push(ChannelView { entry_root: root, side_key, messages });
        }
        views
    }

    /// Answer a key request: one result per requested item, in order.
    pub fn handle_key_request(
        &self,
        tangle: &Tangle,
        machine: &Machine,
        request: &KeyRequest,
    ) -> Result<KeyResponse, AuthError> {
        if !request.verify() {
            return Err(AuthError::BadSignature);
        }
        let users = self.users.read().clone();
        let walked: Vec<(Address, RegisteredUser, Vec<ChannelView>)> = users
            .into_iter()
            .map(|(owner, user)| {
                let views = self.channels_of(tangle, &user);
                (owner, user, views)
            })
            .collect();

        let mut results = Vec::with_capacity(request.items.len());
        for item in &request.items {
            results.push(self.resolve_item(machine, &walked, &request.requester, item));
        }
        Ok(KeyResponse { results })
    }

    fn resolve_item(
        &self,
        machine: &Machine,
        walked: &[(Address, RegisteredUser, Vec<ChannelView>)],
        requester: &Address,
        item: &ItemRef,
    ) -> ItemResult {
        let denied = |reason| ItemResult::Denied { item: item.clone(), reason };

        // Locate the owning user and, for single messages, the message.
        let located = walked.iter().find_map(|(owner, user, views)| match item {
            ItemRef::Tx { address } => views.iter().find_map(|view| {
                view.messages
                    .iter()
                    .find(|m| m.address == *address)
                    .map(|m| (owner, user, views, Some((view.side_key, m.root)), None))
            }),
            ItemRef::Channel { entry_root, .. } => views
                .iter()
                .find(|view| view.entry_root == *entry_root)
                .map(|view| (owner, user, views, None, Some(view))),
        });
        let Some((_owner, user, views, tx_hit, channel_hit)) = located else {
            return denied(DenialReason::UnknownItem);
        };

        let resolver = ViewsResolver { views };
        let allowed = machine
            .check_access(&user.contract_id, requester, item, &resolver)
            .unwrap_or(false);
        if !allowed {
            return denied(DenialReason::AccessDenied);
        }

        match (tx_hit, channel_hit) {
            (Some((side_key, root)), _) => ItemResult::TxKey {
                item: item.clone(),
                root,
                key: derive_key(&side_key, &root),
            },
            (None, Some(view)) => ItemResult::ChannelKeys {
                item: item.clone(),
                entry_root: view.entry_root,
                keys: view
                    .messages
                    .iter()
                    .map(|m| MessageKey { root: m.root, key: derive_key(&view.side_key, &m.root) })
                    .collect(),
            },
            (None, None) => denied(DenialReason::UnknownItem),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contracts::{Applied, DataBundle, Genesis, Op};
    use crate::crypto::{sha256, signing_key_from_seed};
    use crate::ledger::NetworkConfig;
    use crate::mam::fetch_with_message_key;
    use crate::payload::Payload;

    struct Fixture {
        tangle: Tangle,
        machine: Machine,
        service: AuthService,
        owner_key: ed25519_dalek::SigningKey,
        owner: Address,
        master: [u8; 32],
        index_root: Digest,
        contract_id: Digest,
        session_entry: Digest,
        session_roots: Vec<Digest>,
        buyer_key: ed25519_dalek::SigningKey,
        plaintexts: Vec<Payload>,
    }

    /// One provider with a public feature channel and a private session
    /// channel holding two messages; a funded buyer with a purchased grant
    /// on the session channel.
    fn fixture() -> Fixture {
        let config = NetworkConfig::desk();
        let tangle = Tangle::new();

        let owner_key = signing_key_from_seed(&sha256(&[b"auth owner"]).0);
        let owner = Address::of_key(&owner_key.verifying_key());
        let buyer_key = signing_key_from_seed(&sha256(&[b"auth buyer"]).0);
        let buyer = Address::of_key(&buyer_key.verifying_key());
        let master = sha256(&[b"auth master"]).0;

        // Private session channel: side key is the owner's master key.
        let mut session =
            Channel::new(sha256(&[b"session seed"]).0, ChannelKind::Session, master);
        let plaintexts =
            vec![Payload::Inline(b"speed=88".to_vec()), Payload::Inline(b"speed=91".to_vec())];
        let mut session_roots = Vec::new();
        for p in &plaintexts {
            session_roots.push(session.publish(&tangle, &config, p).unwrap().root);
        }

        // Public feature channel announcing the catalog.
        let mut feature = Channel::new(
            sha256(&[b"feature seed"]).0,
            ChannelKind::Feature,
            Channel::public_side_key(),
        );
        feature
            .publish(&tangle, &config, &Payload::ChannelRef {
                kind: ChannelKind::Session,
                root: session.entry_root(),
            })
            .unwrap();

        // Index channel listing both, readable by the service via master.
        let mut index = Channel::new(sha256(&[b"index seed"]).0, ChannelKind::Index, master);
        for (kind, root) in [
            (ChannelKind::Feature, feature.entry_root()),
            (ChannelKind::Session, session.entry_root()),
        ] {
            index.publish(&tangle, &config, &Payload::ChannelRef { kind, root }).unwrap();
        }

        // Contract: one bundle granting the whole session channel.
        let treasury = Address::of_key_bytes(&sha256(&[b"auth treasury"]).0);
        let mut machine = Machine::new(Genesis::new(treasury, 10_000));
        machine.apply(Op::Transfer { from: treasury, to: owner, amount: 100 }).unwrap();
        machine.apply(Op::Transfer { from: treasury, to: buyer, amount: 100 }).unwrap();
        let Applied::Deployed { contract_id } = machine
            .apply(Op::DeployFeature {
                owner,
                catalog: vec![DataBundle {
                    id: 0,
                    items: vec![ItemRef::Channel {
                        channel_kind: ChannelKind::Session,
                        entry_root: session.entry_root(),
                    }],
                    price: 25,
                }],
            })
            .unwrap()
        else {
            panic!()
        };
        machine.apply(Op::PurchaseAccess { buyer, contract_id, bundle_id: 0 }).unwrap();

        let service = AuthService::new();
        let registration = UserRegistration::new_signed(
            &owner_key,
            master,
            index.entry_root(),
            contract_id,
        );
        service.register(&machine, &registration).unwrap();

        Fixture {
            tangle,
            machine,
            service,
            owner_key,
            owner,
            master,
            index_root: index.entry_root(),
            contract_id,
            session_entry: session.entry_root(),
            session_roots,
            buyer_key,
            plaintexts,
        }
    }

    fn channel_item(f: &Fixture) -> ItemRef {
        ItemRef::Channel { channel_kind: ChannelKind::Session, entry_root: f.session_entry }
    }

    #[test]
    fn registration_requires_valid_signature_and_owned_contract() {
        let f = fixture();
        let service = AuthService::new();

        let mut reg = UserRegistration::new_signed(
            &f.owner_key,
            f.master,
            f.index_root,
            f.contract_id,
        );
        service.register(&f.machine, &reg).unwrap();
        assert!(service.is_registered(&f.owner));

        reg.signature[0] ^= 1;
        assert!(matches!(service.register(&f.machine, &reg), Err(AuthError::BadSignature)));

        let foreign = UserRegistration::new_signed(
            &f.buyer_key,
            f.master,
            f.index_root,
            f.contract_id, // owned by `owner`, not `buyer`
        );
        assert!(matches!(
            service.register(&f.machine, &foreign),
            Err(AuthError::UnknownContract(_))
        ));
    }

    #[test]
    fn granted_channel_request_releases_working_keys() {
        let f = fixture();
        let request = KeyRequest::new_signed(&f.buyer_key, vec![channel_item(&f)]);
        let response = f.service.handle_key_request(&f.tangle, &f.machine, &request).unwrap();

        let [ItemResult::ChannelKeys { entry_root, keys, .. }] = &response.results[..] else {
            panic!("expected one channel-keys result, got {:?}", response.results);
        };
        assert_eq!(*entry_root, f.session_entry);
        assert_eq!(keys.len(), 2);
        for (message_key, expected) in keys.iter().zip(&f.plaintexts) {
            assert_eq!(message_key.key, derive_key(&f.master, &message_key.root));
            let fetched =
                fetch_with_message_key(&f.tangle, &message_key.root, &message_key.key).unwrap();
            assert_eq!(&fetched.payload, expected);
        }
    }

    #[test]
    fn single_message_request_in_granted_channel_releases_one_key() {
        let f = fixture();
        let address = mam::address_of(&f.session_roots[1]);
        let request =
            KeyRequest::new_signed(&f.buyer_key, vec![ItemRef::Tx { address }]);
        let response = f.service.handle_key_request(&f.tangle, &f.machine, &request).unwrap();

        let [ItemResult::TxKey { root, key, .. }] = &response.results[..] else {
            panic!("expected one tx-key result, got {:?}", response.results);
        };
        assert_eq!(*root, f.session_roots[1]);
        let fetched = fetch_with_message_key(&f.tangle, root, key).unwrap();
        assert_eq!(fetched.payload, f.plaintexts[1]);
    }

    #[test]
    fn mixed_request_gets_partial_response_in_order() {
        let f = fixture();
        let unknown = ItemRef::Tx { address: sha256(&[b"no such message"]) };
        let request =
            KeyRequest::new_signed(&f.buyer_key, vec![channel_item(&f), unknown.clone()]);
        let response = f.service.handle_key_request(&f.tangle, &f.machine, &request).unwrap();

        assert_eq!(response.results.len(), 2, "one result per requested item");
        assert!(matches!(&response.results[0], ItemResult::ChannelKeys { .. }));
        assert!(matches!(
            &response.results[1],
            ItemResult::Denied { item, reason: DenialReason::UnknownItem } if *item == unknown
        ));
    }

    #[test]
    fn stranger_is_denied_without_key_material() {
        let f = fixture();
        let stranger_key = signing_key_from_seed(&sha256(&[b"stranger"]).0);
        let request = KeyRequest::new_signed(&stranger_key, vec![channel_item(&f)]);
        let response = f.service.handle_key_request(&f.tangle, &f.machine, &request).unwrap();
        assert!(matches!(
            &response.results[..],
            [ItemResult::Denied { reason: DenialReason::AccessDenied, .. }]
        ));
        // And the serialized response leaks no key bytes.
        let json = serde_json::to_string(&response).unwrap();
        assert!(!json.contains("key"));
    }

    #[test]
    fn tampered_request_signature_is_rejected_outright() {
        let f = fixture();
        let mut request = KeyRequest::new_signed(&f.buyer_key, vec![channel_item(&f)]);
        request.items.push(ItemRef::Tx { address: sha256(&[b"sneaky extra"]) });
        assert!(matches!(
            f.service.handle_key_request(&f.tangle, &f.machine, &request),
            Err(AuthError::BadSignature)
        ));
    }

    #[test]
    fn restarted_service_answers_identically() {
        let f = fixture();
        let request = KeyRequest::new_signed(&f.buyer_key, vec![channel_item(&f)]);
        let first = f.service.handle_key_request(&f.tangle, &f.machine, &request).unwrap();

        let restarted = AuthService::new();
        let reg = UserRegistration::new_signed(
            &f.owner_key,
            f.master,
            f.index_root,
            f.contract_id,
        );
        restarted.register(&f.machine, &reg).unwrap();
        let second = restarted.handle_key_request(&f.tangle, &f.machine, &request).unwrap();

        assert_eq!(
            serde_json::to_string(&first).unwrap(),
            serde_json::to_string(&second).unwrap()
        );
    }

    #[test]
    fn owner_can_request_keys_for_own_data() {
        let f = fixture();
        let request = KeyRequest::new_signed(&f.owner_key, vec![channel_item(&f)]);
        let response = f.service.handle_key_request(&f.tangle, &f.machine, &request).unwrap();
        assert!(matches!(&response.results[..], [ItemResult::ChannelKeys { .. }]));
    }
}
