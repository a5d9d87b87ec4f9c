// Copyright 2026 tangleshare contributors
// SPDX-License-Identifier: Apache-2.0

//! Typed message payloads. Small data travels inline; anything larger is
//! stored in the object store and referenced by digest. Payloads can also
//! point at channels, at individual channel messages by ledger address, or
//! carry an opaque signed certificate.

use crate::codec::{CodecError, Reader, Writer};
use crate::crypto::Digest;
use crate::mam::ChannelKind;

const TAG_INLINE: u8 = 0;
const TAG_OBJECT_REF: u8 = 1;
const TAG_CHANNEL_REF: u8 = 2;
const TAG_TX_ADDRESS: u8 = 3;
const TAG_CERTIFICATE: u8 = 4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Payload {
    /// Raw bytes embedded directly in the message.
    Inline(Vec<u8>),
    /// Digest of an (encrypted) object held in the object store.
    ObjectRef(Digest),
    /// Entry root of another channel.
    ChannelRef { kind: ChannelKind, root: Digest },
    /// Ledger address of a single channel message.
    TxAddress(Digest),
    /// Opaque certificate bytes, signed by whoever issued them.
    Certificate(Vec<u8>),
}

impl Payload {
    pub fn encode(&self) -> Vec<u8> {
        let mut w = Writer::new();
        match self {
            Payload::Inline(data) => {
                w.put_u8(TAG_INLINE).put_bytes(data);
            }
            Payload::ObjectRef(digest) => {
                w.put_u8(TAG_OBJECT_REF).put_digest(digest);
            }
            Payload::ChannelRef { kind, root } => {
                w.put_u8(TAG_CHANNEL_REF).put_u8(kind.tag()).put_digest(root);
            }
            Payload::TxAddress(address) => {
                w.put_u8(TAG_TX_ADDRESS).put_digest(address);
            }
            Payload::Certificate(bytes) => {
                w.put_u8(TAG_CERTIFICATE).put_bytes(bytes);
            }
        }
        w.finish()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, CodecError> {
        let mut r = Reader::new(bytes);
        let payload = Self::read_from(&mut r)?;
        r.expect_end()?;
        Ok(payload)
    }

    pub fn read_from(r: &mut Reader<'_>) -> Result<Self, CodecError> {
        let payload = match r.get_u8()? {
            TAG_INLINE => Payload::Inline(r.get_bytes()?),
            TAG_OBJECT_REF => Payload::ObjectRef(r.get_digest()?),
            TAG_CHANNEL_REF => Payload::ChannelRef {
                kind: ChannelKind::from_tag(r.get_u8()?).ok_or(CodecError::InvalidTag(TAG_CHANNEL_REF))?,
                root: r.get_digest()?,
            },
            TAG_TX_ADDRESS => Payload::TxAddress(r.get_digest()?),
            TAG_CERTIFICATE => Payload::Certificate(r.get_bytes()?),
            other => return Err(CodecError::InvalidTag(other)),
        };
        Ok(payload)
    }
}
