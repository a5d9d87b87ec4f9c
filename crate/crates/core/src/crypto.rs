// Copyright 2026 tangleshare contributors
// SPDX-License-Identifier: Apache-2.0

//! Shared cryptographic primitives: SHA-256 digests, short addresses,
//! key derivation, the keystream cipher used by the messaging layer and
//! ed25519 signing helpers.

use std::fmt;
use std::str::FromStr;

use ed25519_dalek::{Signature, Signer, SigningKey, Verifier, VerifyingKey};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest as _, Sha256};

/// A 32-byte SHA-256 digest. Rendered as lowercase hex everywhere.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Digest(pub [u8; 32]);

impl Digest {
    pub const ZERO: Digest = Digest([0u8; 32]);

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }

    /// Number of zero bits at the end of the digest, treating the byte
    /// string as a big-endian integer (so the count starts at the least
    /// significant bit of the last byte).
    pub fn trailing_zero_bits(&self) -> u32 {
        let mut count = 0;
        for byte in self.0.iter().rev() {
            if *byte == 0 {
                count += 8;
            } else {
                count += byte.trailing_zeros();
                break;
            }
        }
        count
    }
}

impl fmt::Display for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&hex::encode(self.0))
    }
}

impl fmt::Debug for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Digest({})", self)
    }
}

impl FromStr for Digest {
    type Err = hex::FromHexError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut out = [0u8; 32];
        hex::decode_to_slice(s, &mut out)?;
        Ok(Digest(out))
    }
}

impl AsRef<[u8]> for Digest {
    fn as_ref(&self) -> &[u8] {
        &self.0
    }
}

impl Serialize for Digest {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Digest {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(de::Error::custom)
    }
}

/// A 20-byte account identifier: the first 20 bytes of the SHA-256 of an
/// ed25519 public key.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Address(pub [u8; 20]);

impl Address {
    pub fn of_key(key: &VerifyingKey) -> Address {
        Self::of_key_bytes(key.as_bytes())
    }

    /// Address of a raw 32-byte public-key encoding.
    pub fn of_key_bytes(key_bytes: &[u8; 32]) -> Address {
        let digest = sha256(&[key_bytes]);
        let mut out = [0u8; 20];
        out.copy_from_slice(&digest.0[..20]);
        Address(out)
    }

    pub fn as_bytes(&self) -> &[u8; 20] {
        &self.0
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&hex::encode(self.0))
    }
}

impl fmt::Debug for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Address({})", self)
    }
}

impl FromStr for Address {
    type Err = hex::FromHexError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut out = [0u8; 20];
        hex::decode_to_slice(s, &mut out)?;
        Ok(Address(out))
    }
}

impl Serialize for Address {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Address {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(de::Error::custom)
    }
}

/// SHA-256 over the concatenation of the given parts.
pub fn sha256(parts: &[&[u8]]) -> Digest {
    let mut hasher = Sha256::new();
    for part in parts {
        hasher.update(part);
    }
    Digest(hasher.finalize().into())
}

/// The key-release derivation rule: `SHA256(master_key || root)`.
///
/// The same rule keys per-message encryption in the messaging layer, with the
/// channel side key taking the place of the master key.
pub fn derive_key(master_key: &[u8], root: &Digest) -> [u8; 32] {
    sha256(&[master_key, &root.0]).0
}

/// XOR `data` with a keystream derived from `key` and a context tag.
///
/// Keystream block `i` is `SHA256(key || tag || be64(i))`. The tag separates
/// keystreams when the same key protects both a ledger payload and its
/// off-ledger object.
pub fn stream_xor(key: &[u8; 32], tag: &[u8], data: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(data.len());
    for (block_index, chunk) in data.chunks(32).enumerate() {
        let block = sha256(&[key, tag, &(block_index as u64).to_be_bytes()]);
        out.extend(chunk.iter().zip(block.0.iter()).map(|(d, k)| d ^ k));
    }
    out
}

/// Message authentication tag: `SHA256(key || data)`.
pub fn mac(key: &[u8; 32], data: &[u8]) -> Digest {
    sha256(&[key, data])
}

/// Deterministic ed25519 signing key from a 32-byte seed.
pub fn signing_key_from_seed(seed: &[u8; 32]) -> SigningKey {
    SigningKey::from_bytes(seed)
}

pub fn sign(key: &SigningKey, message: &[u8]) -> [u8; 64] {
    key.sign(message).to_bytes()
}

pub fn verify_signature(key_bytes: &[u8; 32], message: &[u8], signature: &[u8; 64]) -> bool {
    let Ok(key) = VerifyingKey::from_bytes(key_bytes) else {
        return false;
    };
    key.verify(message, &Signature::from_bytes(signature)).is_ok()
}
