// Copyright 2026 tangleshare contributors
// SPDX-License-Identifier: Apache-2.0

//! The contract state machine. One writer applies operations; every applied
//! operation is appended to a log together with the hash of the state it
//! produced, so a log replayed from genesis must reproduce every hash.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::crypto::{sha256, Address, Digest};

use super::{
    BalanceProof, ChannelResolver, ChannelStatus, ContractError, DataBundle, FeatureContract,
    ItemRef, PaymentChannel,
};

/// Dispute window for payer-initiated channel closes, in logical ticks.
pub const DEFAULT_CHALLENGE_PERIOD: u64 = 100;

/// Initial conditions: the whole fixed supply starts in the treasury.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Genesis {
    pub treasury: Address,
    pub supply: u64,
    pub challenge_period: u64,
}

impl Genesis {
    pub fn new(treasury: Address, supply: u64) -> Self {
        Self { treasury, supply, challenge_period: DEFAULT_CHALLENGE_PERIOD }
    }
}

/// Complete contract-side state. Only `BTreeMap`s, so the canonical JSON
/// serialization — and therefore the state hash — is deterministic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct State {
    pub balances: BTreeMap<Address, u64>,
    pub supply: u64,
    pub treasury: Address,
    pub challenge_period: u64,
    pub features: BTreeMap<Digest, FeatureContract>,
    /// One feature contract per owner.
    pub owners: BTreeMap<Address, Digest>,
    pub channels: BTreeMap<u64, PaymentChannel>,
    pub next_deploy: u64,
    pub next_channel: u64,
    /// Logical time used for challenge deadlines.
    pub now: u64,
}

impl State {
    fn new(genesis: &Genesis) -> Self {
        let mut balances = BTreeMap::new();
        balances.insert(genesis.treasury, genesis.supply);
        State {
            balances,
            supply: genesis.supply,
            treasury: genesis.treasury,
            challenge_period: genesis.challenge_period,
            features: BTreeMap::new(),
            owners: BTreeMap::new(),
            channels: BTreeMap::new(),
            next_deploy: 0,
            next_channel: 0,
            now: 0,
        }
    }

    pub fn hash(&self) -> Digest {
        let bytes = serde_json::to_vec(self).expect("state serializes");
        sha256(&[&bytes])
    }

    /// Tokens in balances plus tokens escrowed in unsettled channels; equal
    /// to the fixed supply under every operation sequence.
    pub fn circulating(&self) -> u64 {
        let held: u64 = self.balances.values().sum();
        let escrowed: u64 = self
            .channels
            .values()
            .filter(|c| !matches!(c.status, ChannelStatus::Settled))
            .map(|c| c.deposit)
            .sum();
        held + escrowed
    }
}

/// Every state-changing operation. Serialized forms appear verbatim in the
/// operation log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Op {
    Transfer { from: Address, to: Address, amount: u64 },
    DeployFeature { owner: Address, catalog: Vec<DataBundle> },
    AddBundle { owner: Address, contract_id: Digest, bundle: DataBundle },
    PurchaseAccess { buyer: Address, contract_id: Digest, bundle_id: u64 },
    OpenChannel { payer: Address, payee: Address, deposit: u64 },
    CloseChannel { channel_id: u64, closer: Address, proof: Option<BalanceProof> },
    ChallengeClose { channel_id: u64, proof: BalanceProof },
    FinalizeClose { channel_id: u64 },
    AdvanceTime { ticks: u64 },
}

/// One applied operation and the state hash it produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    #[serde(flatten)]
    pub op: Op,
    pub state_hash: Digest,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct GenesisRecord {
    genesis: Genesis,
    state_hash: Digest,
}

/// Outcome details of operations that allocate identifiers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Applied {
    Done,
    Deployed { contract_id: Digest },
    ChannelOpened { channel_id: u64 },
}

pub struct Machine {
    genesis: Genesis,
    state: State,
    log: Vec<LogEntry>,
}

impl Machine {
    pub fn new(genesis: Genesis) -> Self {
        let state = State::new(&genesis);
        Machine { genesis, state, log: Vec::new() }
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    pub fn genesis(&self) -> &Genesis {
        &self.genesis
    }

    pub fn log(&self) -> &[LogEntry] {
        &self.log
    }

    pub fn balance_of(&self, address: &Address) -> u64 {
        self.state.balances.get(address).copied().unwrap_or(0)
    }

    pub fn feature(&self, contract_id: &Digest) -> Option<&FeatureContract> {
        self.state.features.get(contract_id)
    }

    pub fn feature_of_owner(&self, owner: &Address) -> Option<&FeatureContract> {
        self.state.owners.get(owner).and_then(|id| self.state.features.get(id))
    }

    pub fn channel(&self, channel_id: u64) -> Option<&PaymentChannel> {
        self.state.channels.get(&channel_id)
    }

    /// Apply one operation atomically: on error the state is untouched and
    /// nothing is logged.
    pub fn apply(&mut self, op: Op) -> Result<Applied, ContractError> {
        let mut next = self.state.clone();
        let applied = Self::execute(&mut next, &op)?;
        let state_hash = next.hash();
        self.state = next;
        self.log.push(LogEntry { op, state_hash });
        Ok(applied)
    }

    fn execute(state: &mut State, op: &Op) -> Result<Applied, ContractError> {
        match op {
            Op::Transfer { from, to, amount } => {
                let have = state.balances.get(from).copied().unwrap_or(0);
                if have < *amount {
                    return Err(ContractError::InsufficientFunds { need: *amount, have });
                }
                *state.balances.entry(*from).or_insert(0) -= amount;
                *state.balances.entry(*to).or_insert(0) += amount;
                Ok(Applied::Done)
            }
            Op::DeployFeature { owner, catalog } => {
                if !state.balances.contains_key(owner) {
                    return Err(ContractError::UnknownAddress(*owner));
                }
                if state.owners.contains_key(owner) {
                    return Err(ContractError::DuplicateRegistration(*owner));
                }
                let mut bundles = BTreeMap::new();
                for bundle in catalog {
                    Self::validate_bundle(bundle)?;
                    if bundles.insert(bundle.id, bundle.clone()).is_some() {
                        return Err(ContractError::DuplicateBundleId(bundle.id));
                    }
                }
                let contract_id = sha256(&[&owner.0, &state.next_deploy.to_be_bytes()]);
                state.next_deploy += 1;
                state.owners.insert(*owner, contract_id);
                state.features.insert(
                    contract_id,
                    FeatureContract {
                        contract_id,
                        owner: *owner,
                        catalog: bundles,
                        acl: BTreeMap::new(),
                    },
                );
                Ok(Applied::Deployed { contract_id })
            }
            Op::AddBundle { owner, contract_id, bundle } => {
                Self::validate_bundle(bundle)?;
                let feature = state
                    .features
                    .get_mut(contract_id)
                    .ok_or(ContractError::UnknownContract(*contract_id))?;
                if feature.owner != *owner {
                    return Err(ContractError::NotOwner);
                }
                if feature.catalog.contains_key(&bundle.id) {
                    return Err(ContractError::DuplicateBundleId(bundle.id));
                }
                feature.catalog.insert(bundle.id, bundle.clone());
                Ok(Applied::Done)
            }
            Op::PurchaseAccess { buyer, contract_id, bundle_id } => {
                let feature = state
                    .features
                    .get(contract_id)
                    .ok_or(ContractError::UnknownContract(*contract_id))?;
                let owner = feature.owner;
                if owner == *buyer {
                    return Err(ContractError::AlreadyGranted(*bundle_id));
                }
                let price = feature
                    .catalog
                    .get(bundle_id)
                    .ok_or(ContractError::UnknownBundle(*bundle_id))?
                    .price;
                if feature.acl.get(buyer).is_some_and(|set| set.contains(bundle_id)) {
                    return Err(ContractError::AlreadyGranted(*bundle_id));
                }
                let have = state.balances.get(buyer).copied().unwrap_or(0);
                if have < price {
                    return Err(ContractError::InsufficientFunds { need: price, have });
                }
                *state.balances.entry(*buyer).or_insert(0) -= price;
                *state.balances.entry(owner).or_insert(0) += price;
                state
                    .features
                    .get_mut(contract_id)
                    .expect("checked above")
                    .acl
                    .entry(*buyer)
                    .or_default()
                    .insert(*bundle_id);
                Ok(Applied::Done)
            }
            Op::OpenChannel { payer, payee, deposit } => {
                let have = state.balances.get(payer).copied().unwrap_or(0);
                if *deposit == 0 || have < *deposit {
                    return Err(ContractError::InsufficientFunds {
                        need: (*deposit).max(1),
                        have,
                    });
                }
                *state.balances.entry(*payer).or_insert(0) -= deposit;
                let channel_id = state.next_channel;
                state.next_channel += 1;
                state.channels.insert(
                    channel_id,
                    PaymentChannel {
                        channel_id,
                        payer: *payer,
                        payee: *payee,
                        deposit: *deposit,
                        status: ChannelStatus::Open,
                        best_proof: None,
                    },
                );
                Ok(Applied::ChannelOpened { channel_id })
            }
            Op::CloseChannel { channel_id, closer, proof } => {
                let channel = state
                    .channels
                    .get(channel_id)
                    .ok_or(ContractError::UnknownChannel(*channel_id))?
                    .clone();
                if channel.status != ChannelStatus::Open {
                    return Err(ContractError::AlreadySettled);
                }
                if *closer != channel.payer && *closer != channel.payee {
                    return Err(ContractError::NotAParty);
                }
                let best = match proof {
                    Some(p) => {
                        Self::validate_proof(&channel, p)?;
                        Some(p.clone())
                    }
                    None => None,
                };
                if *closer == channel.payee {
                    // The payee closing can never be cheated by itself:
                    // settle immediately with whatever it submitted.
                    Self::settle(state, *channel_id, &best)
                } else {
                    let deadline = state.now + state.challenge_period;
                    let channel = state.channels.get_mut(channel_id).expect("checked above");
                    channel.status = ChannelStatus::Closing { deadline };
                    channel.best_proof = best;
                    Ok(Applied::Done)
                }
            }
            Op::ChallengeClose { channel_id, proof } => {
                let channel = state
                    .channels
                    .get(channel_id)
                    .ok_or(ContractError::UnknownChannel(*channel_id))?
                    .clone();
                let deadline = match channel.status {
                    ChannelStatus::Closing { deadline } => deadline,
                    ChannelStatus::Settled => return Err(ContractError::AlreadySettled),
                    ChannelStatus::Open => return Err(ContractError::InvalidProof("channel not closing")),
                };
                if state.now >= deadline {
                    return Err(ContractError::ChallengeExpired);
                }
                Self::validate_proof(&channel, proof)?;
                if let Some(best) = &channel.best_proof {
                    if proof.seq <= best.seq {
                        return Err(ContractError::InvalidProof("sequence not newer"));
                    }
                    if proof.cumulative < best.cumulative {
                        return Err(ContractError::InvalidProof("cumulative decreased"));
                    }
                }
                state.channels.get_mut(channel_id).expect("checked above").best_proof =
                    Some(proof.clone());
                Ok(Applied::Done)
            }
            Op::FinalizeClose { channel_id } => {
                let channel = state
                    .channels
                    .get(channel_id)
                    .ok_or(ContractError::UnknownChannel(*channel_id))?
                    .clone();
                let deadline = match channel.status {
                    ChannelStatus::Closing { deadline } => deadline,
                    ChannelStatus::Settled => return Err(ContractError::AlreadySettled),
                    ChannelStatus::Open => return Err(ContractError::ChallengePending),
                };
                if state.now < deadline {
                    return Err(ContractError::ChallengePending);
                }
                let best = channel.best_proof.clone();
                Self::settle(state, *channel_id, &best)
            }
            Op::AdvanceTime { ticks } => {
                state.now += ticks;
                Ok(Applied::Done)
            }
        }
    }

    fn validate_bundle(bundle: &DataBundle) -> Result<(), ContractError> {
        if bundle.items.is_empty() {
            return Err(ContractError::EmptyBundleItems);
        }
        Ok(())
    }

    fn validate_proof(channel: &PaymentChannel, proof: &BalanceProof) -> Result<(), ContractError> {
        if proof.channel_id != channel.channel_id {
            return Err(ContractError::InvalidProof("wrong channel"));
        }
        if proof.cumulative > channel.deposit {
            return Err(ContractError::InvalidProof("cumulative exceeds deposit"));
        }
        if !proof.verify(&channel.payer) {
            return Err(ContractError::InvalidProof("bad signature"));
        }
        Ok(())
    }

    fn settle(
        state: &mut State,
        channel_id: u64,
        best: &Option<BalanceProof>,
    ) -> Result<Applied, ContractError> {
        let channel = state.channels.get_mut(&channel_id).expect("caller checked");
        let paid = best.as_ref().map(|p| p.cumulative).unwrap_or(0).min(channel.deposit);
        let refund = channel.deposit - paid;
        let (payer, payee) = (channel.payer, channel.payee);
        channel.status = ChannelStatus::Settled;
        channel.best_proof = best.clone();
        *state.balances.entry(payee).or_insert(0) += paid;
        *state.balances.entry(payer).or_insert(0) += refund;
        Ok(Applied::Done)
    }

    /// True iff `who` may read `item` under the given contract: the owner
    /// always may; a buyer may when some granted bundle lists the item
    /// itself or a channel that contains it.
    pub fn check_access(
        &self,
        contract_id: &Digest,
        who: &Address,
        item: &ItemRef,
        resolver: &dyn ChannelResolver,
    ) -> Result<bool, ContractError> {
        let feature = self
            .state
            .features
            .get(contract_id)
            .ok_or(ContractError::UnknownContract(*contract_id))?;
        if feature.owner == *who {
            return Ok(true);
        }
        let Some(granted) = feature.acl.get(who) else {
            return Ok(false);
        };
        for bundle_id in granted {
            let bundle = &feature.catalog[bundle_id];
            for listed in &bundle.items {
                if listed == item {
                    return Ok(true);
                }
                if let (ItemRef::Channel { entry_root, .. }, ItemRef::Tx { address }) = (listed, item)
                {
                    if resolver.channel_contains(entry_root, address) {
                        return Ok(true);
                    }
                }
            }
        }
        Ok(false)
    }

    /// The full operation log as newline-delimited JSON, starting with the
    /// genesis record.
    pub fn log_jsonl(&self) -> String {
        let mut out = String::new();
        let genesis_record = GenesisRecord {
            genesis: self.genesis.clone(),
            state_hash: State::new(&self.genesis).hash(),
        };
        out.push_str(&serde_json::to_string(&genesis_record).expect("serializes"));
        out.push('\n');
        for entry in &self.log {
            out.push_str(&serde_json::to_string(entry).expect("serializes"));
            out.push('\n');
        }
        out
    }

    /// Rebuild a machine by replaying a log, verifying every recorded state
    /// hash along the way.
    pub fn replay(jsonl: &str) -> Result<Machine, ContractError> {
        let mut lines = jsonl.lines().filter(|l| !l.trim().is_empty());
        let first = lines.next().ok_or_else(|| ContractError::BadLog("empty log".into()))?;
        let genesis_record: GenesisRecord = serde_json::from_str(first)
            .map_err(|e| ContractError::BadLog(format!("genesis record: {e}")))?;
        let mut machine = Machine::new(genesis_record.genesis);
        if machine.state.hash() != genesis_record.state_hash {
            return Err(ContractError::BadLog("genesis state hash mismatch".into()));
        }
        for (number, line) in lines.enumerate() {
            let entry: LogEntry = serde_json::from_str(line)
                .map_err(|e| ContractError::BadLog(format!("entry {number}: {e}")))?;
            machine
                .apply(entry.op.clone())
                .map_err(|e| ContractError::BadLog(format!("entry {number} failed: {e}")))?;
            if machine.state.hash() != entry.state_hash {
                return Err(ContractError::BadLog(format!("entry {number}: state hash mismatch")));
            }
        }
        Ok(machine)
    }
}
