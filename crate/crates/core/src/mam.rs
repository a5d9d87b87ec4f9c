// Copyright 2026 tangleshare contributors
// SPDX-License-Identifier: Apache-2.0

//! Masked, authenticated message channels on top of the ledger.
//!
//! A channel is a forward chain of messages. Message `i` lives at a root
//! derived from the channel seed, is encrypted with a key derived from the
//! channel's side key and that root, and carries the next root inside its
//! ciphertext — so one released root plus the side key unlocks the stream
//! from that point forward and nothing before it.
//!
//! Every message is attached as a bundle of exactly four ledger
//! transactions; the message bytes are split evenly across the four
//! transaction payloads.

use ed25519_dalek::SIGNATURE_LENGTH;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{CodecError, Reader, Writer};
use crate::crypto::{self, derive_key, mac, sha256, sign, stream_xor, verify_signature, Digest};
use crate::ledger::{Bundle, LedgerError, NetworkConfig, Tangle};
use crate::payload::Payload;

/// Number of ledger transactions per channel message.
pub const FRAGMENTS_PER_MESSAGE: usize = 4;

const MAGIC: &[u8; 4] = b"MAM\x01";
const STREAM_TAG: &[u8] = b"msg";

#[derive(Debug, Error)]
pub enum MamError {
    #[error("no message found at root {0}")]
    NotFound(Digest),
    #[error("authentication tag mismatch: wrong key or corrupted message")]
    AuthFailure,
    #[error("message signature is invalid")]
    SignatureInvalid,
    #[error("malformed message: {0}")]
    Malformed(&'static str),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error(transparent)]
    Codec(#[from] CodecError),
}

/// What a channel carries: a provider's public catalog, a private data
/// session, or a subscriber's index of granted sessions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    Feature,
    Session,
    Index,
}

impl ChannelKind {
    pub fn tag(self) -> u8 {
        match self {
            ChannelKind::Feature => 1,
            ChannelKind::Session => 2,
            ChannelKind::Index => 3,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            1 => Some(ChannelKind::Feature),
            2 => Some(ChannelKind::Session),
            3 => Some(ChannelKind::Index),
            _ => None,
        }
    }
}

/// Root of message `index` in the channel identified by `seed` and `kind`.
pub fn root_at(seed: &[u8; 32], kind: ChannelKind, index: u64) -> Digest {
    sha256(&[seed, &index.to_be_bytes(), &[kind.tag()]])
}

/// Ledger lookup address of the message at `root`.
pub fn address_of(root: &Digest) -> Digest {
    sha256(&[&root.0])
}

/// A successfully fetched and verified channel message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FetchedMessage {
    pub root: Digest,
    pub next_root: Digest,
    pub payload: Payload,
    pub signer: [u8; 32],
}

/// Result of publishing one message.
#[derive(Debug, Clone)]
pub struct Published {
    pub root: Digest,
    pub next_root: Digest,
    pub address: Digest,
    pub bundle: Bundle,
}

/// Writer half of a channel: owns the seed, tracks the next index.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Channel {
    seed: [u8; 32],
    kind: ChannelKind,
    side_key: [u8; 32],
    next_index: u64,
}

impl Channel {
    pub fn new(seed: [u8; 32], kind: ChannelKind, side_key: [u8; 32]) -> Self {
        Self { seed, kind, side_key, next_index: 0 }
    }

    /// Side key for channels meant to be readable by anyone who finds the
    /// entry root (catalogs and other announcements).
    pub fn public_side_key() -> [u8; 32] {
        [0u8; 32]
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    pub fn side_key(&self) -> &[u8; 32] {
        &self.side_key
    }

    pub fn next_index(&self) -> u64 {
        self.next_index
    }

    /// Root of the first message; hand this out to let readers follow the
    /// channel from the start.
    pub fn entry_root(&self) -> Digest {
        self.root_at(0)
    }

    pub fn root_at(&self, index: u64) -> Digest {
        root_at(&self.seed, self.kind, index)
    }

    pub fn address_at(&self, index: u64) -> Digest {
        address_of(&self.root_at(index))
    }

    /// Decryption key of message `index`: derived from the side key and the
    /// message root, never from the seed itself.
    pub fn message_key_at(&self, index: u64) -> [u8; 32] {
        derive_key(&self.side_key, &self.root_at(index))
    }

    fn signing_key_at(&self, index: u64) -> ed25519_dalek::SigningKey {
        let seed = sha256(&[&self.seed, b"sig", &index.to_be_bytes()]);
        crypto::signing_key_from_seed(&seed.0)
    }

    fn tip_seed_at(&self, index: u64) -> u64 {
        let h = sha256(&[&self.seed, b"tips", &index.to_be_bytes()]);
        u64::from_be_bytes(h.0[..8].try_into().unwrap())
    }

    /// Encrypt, authenticate, sign and attach the next message.
    pub fn publish(
        &mut self,
        tangle: &Tangle,
        config: &NetworkConfig,
        payload: &Payload,
    ) -> Result<Published, MamError> {
        let index = self.next_index;
        let root = self.root_at(index);
        let next_root = self.root_at(index + 1);
        let msg_key = self.message_key_at(index);

        let mut plaintext = Vec::with_capacity(32 + 64);
        plaintext.extend_from_slice(&next_root.0);
        plaintext.extend_from_slice(&payload.encode());
        let ciphertext = stream_xor(&msg_key, STREAM_TAG, &plaintext);
        let auth_tag = mac(&msg_key, &ciphertext);

        let signing_key = self.signing_key_at(index);
        let mut signed = Vec::with_capacity(64 + ciphertext.len());
        signed.extend_from_slice(&root.0);
        signed.extend_from_slice(&next_root.0);
        signed.extend_from_slice(&ciphertext);
        let signature = sign(&signing_key, &signed);

        let mut w = Writer::new();
        w.put_raw(MAGIC)
            .put_digest(&root)
            .put_raw(signing_key.verifying_key().as_bytes())
            .put_raw(&signature)
            .put_digest(&auth_tag)
            .put_bytes(&ciphertext);
        let wire = w.finish();

        let fragments = split_fragments(&wire);
        let bundle = tangle.attach(&fragments, config, self.tip_seed_at(index))?;
        self.next_index += 1;
        Ok(Published { root, next_root, address: address_of(&root), bundle })
    }
}

/// Split the wire bytes into four equal fragments, zero-padding the tail.
fn split_fragments(wire: &[u8]) -> Vec<Vec<u8>> {
    let chunk = wire.len().div_ceil(FRAGMENTS_PER_MESSAGE);
    let mut padded = wire.to_vec();
    padded.resize(chunk * FRAGMENTS_PER_MESSAGE, 0);
    padded.chunks(chunk).map(|c| c.to_vec()).collect()
}

struct WireMessage {
    root: Digest,
    signer: [u8; 32],
    signature: [u8; SIGNATURE_LENGTH],
    auth_tag: Digest,
    ciphertext: Vec<u8>,
}

fn parse_wire(wire: &[u8]) -> Result<WireMessage, MamError> {
    let mut r = Reader::new(wire);
    if r.get_raw(4)? != MAGIC {
        return Err(MamError::Malformed("bad magic"));
    }
    let root = r.get_digest()?;
    let signer: [u8; 32] = r.get_raw(32)?.try_into().unwrap();
    let signature: [u8; SIGNATURE_LENGTH] = r.get_raw(SIGNATURE_LENGTH)?.try_into().unwrap();
    let auth_tag = r.get_digest()?;
    let ciphertext = r.get_bytes()?;
    // Fragmentation pads the tail with zeros; anything else is corruption.
    let padding = r.get_raw(r.remaining())?;
    if padding.iter().any(|b| *b != 0) {
        return Err(MamError::Malformed("nonzero padding"));
    }
    Ok(WireMessage { root, signer, signature, auth_tag, ciphertext })
}

/// Reassemble the wire bytes of the message bundle at `root`, if present.
fn find_wire(tangle: &Tangle, root: &Digest) -> Option<Vec<u8>> {
    for bundle in tangle.bundles() {
        if bundle.len() != FRAGMENTS_PER_MESSAGE {
            continue;
        }
        let first = &bundle[0].payload;
        if first.len() < 4 + 32 || &first[..4] != MAGIC || first[4..36] != root.0 {
            continue;
        }
        let mut wire = Vec::new();
        for tx in &bundle {
            wire.extend_from_slice(&tx.payload);
        }
        return Some(wire);
    }
    None
}

/// Fetch and verify the message at `root`, decrypting with `side_key`.
///
/// Verification order: authentication tag, then decryption, then structure,
/// then signature.
pub fn fetch(tangle: &Tangle, root: &Digest, side_key: &[u8; 32]) -> Result<FetchedMessage, MamError> {
    let wire = find_wire(tangle, root).ok_or(MamError::NotFound(*root))?;
    let msg = parse_wire(&wire)?;
    let msg_key = derive_key(side_key, root);
    decrypt_and_verify(&msg, &msg_key)
}

/// Decrypt and verify a parsed message with an explicit message key, for
/// readers that were granted per-message keys rather than the side key.
pub fn fetch_with_message_key(
    tangle: &Tangle,
    root: &Digest,
    msg_key: &[u8; 32],
) -> Result<FetchedMessage, MamError> {
    let wire = find_wire(tangle, root).ok_or(MamError::NotFound(*root))?;
    let msg = parse_wire(&wire)?;
    decrypt_and_verify(&msg, msg_key)
}

fn decrypt_and_verify(msg: &WireMessage, msg_key: &[u8; 32]) -> Result<FetchedMessage, MamError> {
    if mac(msg_key, &msg.ciphertext) != msg.auth_tag {
        return Err(MamError::AuthFailure);
    }
    let plaintext = stream_xor(msg_key, STREAM_TAG, &msg.ciphertext);
    if plaintext.len() < 32 {
        return Err(MamError::Malformed("plaintext too short"));
    }
    let next_root = Digest(plaintext[..32].try_into().unwrap());
    let payload = Payload::decode(&plaintext[32..])?;

    let mut signed = Vec::with_capacity(64 + msg.ciphertext.len());
    signed.extend_from_slice(&msg.root.0);
    signed.extend_from_slice(&next_root.0);
    signed.extend_from_slice(&msg.ciphertext);
    if !verify_signature(&msg.signer, &signed, &msg.signature) {
        return Err(MamError::SignatureInvalid);
    }
    Ok(FetchedMessage { root: msg.root, next_root, payload, signer: msg.signer })
}

/// Follow a channel from `entry_root`, returning consecutive messages until
/// the chain runs out or `limit` is reached.
pub fn follow(
    tangle: &Tangle,
    entry_root: &Digest,
    side_key: &[u8; 32],
    limit: usize,
) -> Result<Vec<FetchedMessage>, MamError> {
    let mut out = Vec::new();
    let mut root = *entry_root;
    while out.len() < limit {
        match fetch(tangle, &root, side_key) {
            Ok(msg) => {
                root = msg.next_root;
                out.push(msg);
            }
            Err(MamError::NotFound(_)) => break,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}
