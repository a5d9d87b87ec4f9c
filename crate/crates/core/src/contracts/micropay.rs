// Copyright 2026 tangleshare contributors
// SPDX-License-Identifier: Apache-2.0

//! Off-chain micropayments. The payer signs cumulative balance proofs; only
//! channel open and settlement ever touch the token ledger.

use ed25519_dalek::SigningKey;
use serde::{Deserialize, Serialize};

use crate::crypto::{sign, verify_signature, Address};

use super::{ChannelStatus, ContractError, PaymentChannel};

/// A signed claim that the payer owes the payee `cumulative` tokens in
/// total on this channel. Higher `seq` supersedes lower.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BalanceProof {
    pub channel_id: u64,
    pub cumulative: u64,
    pub seq: u64,
    #[serde(with = "hex::serde")]
    pub payer_pubkey: [u8; 32],
    #[serde(with = "hex::serde")]
    pub signature: [u8; 64],
}

impl BalanceProof {
    /// Exactly the bytes the payer signs: channel id, cumulative amount and
    /// sequence number, each big-endian.
    pub fn signed_bytes(channel_id: u64, cumulative: u64, seq: u64) -> [u8; 24] {
        let mut out = [0u8; 24];
        out[..8].copy_from_slice(&channel_id.to_be_bytes());
        out[8..16].copy_from_slice(&cumulative.to_be_bytes());
        out[16..].copy_from_slice(&seq.to_be_bytes());
        out
    }

    /// True iff the signature verifies and the embedded key belongs to the
    /// expected payer address.
    pub fn verify(&self, payer: &Address) -> bool {
        if Address::of_key_bytes(&self.payer_pubkey) != *payer {
            return false;
        }
        let bytes = Self::signed_bytes(self.channel_id, self.cumulative, self.seq);
        verify_signature(&self.payer_pubkey, &bytes, &self.signature)
    }
}

/// Payer-side cursor over one channel: tracks the running total and signs
/// each new proof. Purely off-chain.
pub struct Micropayer {
    channel_id: u64,
    deposit: u64,
    cumulative: u64,
    seq: u64,
    signing_key: SigningKey,
}

impl Micropayer {
    /// Bind to an open channel. The signing key must belong to the
    /// channel's payer address.
    pub fn new(channel: &PaymentChannel, signing_key: SigningKey) -> Result<Self, ContractError> {
        if Address::of_key(&signing_key.verifying_key()) != channel.payer {
            return Err(ContractError::NotAParty);
        }
        if channel.status != ChannelStatus::Open {
            return Err(ContractError::AlreadySettled);
        }
        Ok(Self {
            channel_id: channel.channel_id,
            deposit: channel.deposit,
            cumulative: 0,
            seq: 0,
            signing_key,
        })
    }

    /// Rebind to an open channel at a previously reached running total, for
    /// payers that persist their cursor between sessions.
    pub fn resume(
        channel: &PaymentChannel,
        signing_key: SigningKey,
        cumulative: u64,
        seq: u64,
    ) -> Result<Self, ContractError> {
        let mut payer = Self::new(channel, signing_key)?;
        if cumulative > payer.deposit {
            return Err(ContractError::ExceedsDeposit);
        }
        payer.cumulative = cumulative;
        payer.seq = seq;
        Ok(payer)
    }

    #[cfg(test)]
    pub(crate) fn for_test(channel_id: u64, deposit: u64, signing_key: SigningKey) -> Self {
        Self { channel_id, deposit, cumulative: 0, seq: 0, signing_key }
    }

    pub fn channel_id(&self) -> u64 {
        self.channel_id
    }

    pub fn cumulative(&self) -> u64 {
        self.cumulative
    }

    pub fn seq(&self) -> u64 {
        self.seq
    }

    /// Sign the next proof, raising the running total by `amount`.
    pub fn pay(&mut self, amount: u64) -> Result<BalanceProof, ContractError> {
        let cumulative =
            self.cumulative.checked_add(amount).ok_or(ContractError::ExceedsDeposit)?;
        if cumulative > self.deposit {
            return Err(ContractError::ExceedsDeposit);
        }
        self.cumulative = cumulative;
        self.seq += 1;
        let bytes = BalanceProof::signed_bytes(self.channel_id, self.cumulative, self.seq);
        Ok(BalanceProof {
            channel_id: self.channel_id,
            cumulative: self.cumulative,
            seq: self.seq,
            payer_pubkey: self.signing_key.verifying_key().to_bytes(),
            signature: sign(&self.signing_key, &bytes),
        })
    }
}
