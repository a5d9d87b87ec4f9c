// Copyright 2026 tangleshare contributors
// SPDX-License-Identifier: Apache-2.0

//! On-disk workspace: key store, ledger snapshot, contract operation log,
//! PKI registry and object store under one directory.
//!
//! Everything secret is derived from one 32-byte workspace seed, so a
//! command script replayed against the same `init --seed` produces a
//! byte-identical workspace. Layout:
//!
//! ```text
//! <root>/workspace.json   seed, network
//! <root>/tangle.bin       ledger snapshot
//! <root>/contracts.log    contract operation log (JSON lines)
//! <root>/pki.json         device registry
//! <root>/users.json       local users: keys, channels, catalog map
//! <root>/paychan.json     payment-channel cursors and latest proofs
//! <root>/objects/         content-addressed objects
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use tangleshare::authsvc::{AuthService, UserRegistration};
use tangleshare::contracts::{BalanceProof, Genesis, Machine, Op};
use tangleshare::crypto::{sha256, signing_key_from_seed, Address, Digest};
use tangleshare::ledger::{NetworkConfig, Tangle};
use tangleshare::mam::{Channel, ChannelKind};
use tangleshare::pol::PkiRegistry;
use tangleshare::store::ObjectStore;

use crate::error::{CliError, CliResult};

pub const WORKSPACE_ENV: &str = "TANGLESHARE_WORKSPACE";

const META_FILE: &str = "workspace.json";
const TANGLE_FILE: &str = "tangle.bin";
const CONTRACTS_FILE: &str = "contracts.log";
const PKI_FILE: &str = "pki.json";
const USERS_FILE: &str = "users.json";
const PAYCHAN_FILE: &str = "paychan.json";

/// Token supply minted to the workspace treasury at initialization.
pub const DEFAULT_SUPPLY: u64 = 1_000_000;
/// Tokens granted to each new user from the treasury.
pub const DEFAULT_GRANT: u64 = 1_000;
/// Default price of a catalog bundle created by `publish`.
pub const DEFAULT_PRICE: u64 = 25;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Meta {
    pub version: u32,
    #[serde(with = "hex::serde")]
    pub seed: [u8; 32],
    pub network: NetworkConfig,
}

/// One local identity: key material, its channels and its catalog map.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UserRecord {
    pub name: String,
    #[serde(with = "hex::serde")]
    pub signing_seed: [u8; 32],
    #[serde(with = "hex::serde")]
    pub master_key: [u8; 32],
    pub address: Address,
    pub contract_id: Digest,
    pub index: Channel,
    /// Feature name → private session channel carrying that feature's data.
    pub features: BTreeMap<String, Channel>,
    /// Feature name → catalog bundle id in this user's contract.
    pub feature_bundles: BTreeMap<String, u64>,
}

impl UserRecord {
    pub fn signing_key(&self) -> ed25519_dalek::SigningKey {
        signing_key_from_seed(&self.signing_seed)
    }
}

/// Payer-side cursor of one payment channel, plus the newest signed proof
/// (which the payee would hold in a real deployment).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PaychanRecord {
    pub channel_id: u64,
    pub payer: String,
    pub payee: Address,
    pub cumulative: u64,
    pub seq: u64,
    pub latest_proof: Option<BalanceProof>,
}

pub struct Workspace {
    pub root: PathBuf,
    pub meta: Meta,
    pub tangle: Tangle,
    pub machine: Machine,
    pub store: ObjectStore,
    pub pki: PkiRegistry,
    pub users: BTreeMap<String, UserRecord>,
    pub paychans: BTreeMap<u64, PaychanRecord>,
}

fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

fn corrupt(file: &str, detail: impl ToString) -> CliError {
    CliError::Corrupt { file: file.into(), detail: detail.to_string() }
}

impl Workspace {
    /// Create a fresh workspace directory. Fails if one already exists.
    pub fn init(root: &Path, seed: [u8; 32], network: NetworkConfig) -> CliResult<Self> {
        if root.join(META_FILE).exists() {
            return Err(CliError::AlreadyInitialized(root.to_path_buf()));
        }
        fs::create_dir_all(root)?;
        let meta = Meta { version: 1, seed, network };
        let treasury = treasury_of(&seed);
        let ws = Workspace {
            root: root.to_path_buf(),
            tangle: Tangle::new(),
            machine: Machine::new(Genesis::new(treasury, DEFAULT_SUPPLY)),
            store: ObjectStore::open(root)?,
            pki: PkiRegistry::new(),
            users: BTreeMap::new(),
            paychans: BTreeMap::new(),
            meta,
        };
        ws.save()?;
        Ok(ws)
    }

    pub fn load(root: &Path) -> CliResult<Self> {
        let meta_bytes = match fs::read(root.join(META_FILE)) {
            Ok(bytes) => bytes,
            Err(e) if e.kind() == io::ErrorKind::NotFound => {
                return Err(CliError::NotInitialized(root.to_path_buf()))
            }
            Err(e) => return Err(e.into()),
        };
        let meta: Meta =
            serde_json::from_slice(&meta_bytes).map_err(|e| corrupt(META_FILE, e))?;

        let tangle = match fs::read(root.join(TANGLE_FILE)) {
            Ok(bytes) => Tangle::load(&bytes, &meta.network)?,
            Err(e) if e.kind() == io::ErrorKind::NotFound => Tangle::new(),
            Err(e) => return Err(e.into()),
        };
        let machine = match fs::read_to_string(root.join(CONTRACTS_FILE)) {
            Ok(log) => Machine::replay(&log)?,
            Err(e) if e.kind() == io::ErrorKind::NotFound => {
                Machine::new(Genesis::new(treasury_of(&meta.seed), DEFAULT_SUPPLY))
            }
            Err(e) => return Err(e.into()),
        };
        let pki = match fs::read_to_string(root.join(PKI_FILE)) {
            Ok(json) => PkiRegistry::from_json(&json).map_err(|e| corrupt(PKI_FILE, e))?,
            Err(e) if e.kind() == io::ErrorKind::NotFound => PkiRegistry::new(),
            Err(e) => return Err(e.into()),
        };
        let users = match fs::read(root.join(USERS_FILE)) {
            Ok(bytes) => serde_json::from_slice(&bytes).map_err(|e| corrupt(USERS_FILE, e))?,
            Err(e) if e.kind() == io::ErrorKind::NotFound => BTreeMap::new(),
            Err(e) => return Err(e.into()),
        };
        let paychans = match fs::read(root.join(PAYCHAN_FILE)) {
            Ok(bytes) => serde_json::from_slice(&bytes).map_err(|e| corrupt(PAYCHAN_FILE, e))?,
            Err(e) if e.kind() == io::ErrorKind::NotFound => BTreeMap::new(),
            Err(e) => return Err(e.into()),
        };

        Ok(Workspace {
            root: root.to_path_buf(),
            store: ObjectStore::open(root)?,
            meta,
            tangle,
            machine,
            pki,
            users,
            paychans,
        })
    }

    pub fn save(&self) -> CliResult {
        write_atomic(
            &self.root.join(META_FILE),
            serde_json::to_string_pretty(&self.meta)?.as_bytes(),
        )?;
        write_atomic(&self.root.join(TANGLE_FILE), &self.tangle.dump())?;
        write_atomic(&self.root.join(CONTRACTS_FILE), self.machine.log_jsonl().as_bytes())?;
        write_atomic(&self.root.join(PKI_FILE), self.pki.to_json().as_bytes())?;
        write_atomic(
            &self.root.join(USERS_FILE),
            serde_json::to_string_pretty(&self.users)?.as_bytes(),
        )?;
        write_atomic(
            &self.root.join(PAYCHAN_FILE),
            serde_json::to_string_pretty(&self.paychans)?.as_bytes(),
        )?;
        Ok(())
    }

    /// Domain-separated derivation from the workspace seed.
    pub fn derive(&self, parts: &[&[u8]]) -> [u8; 32] {
        let mut input: Vec<&[u8]> = vec![&self.meta.seed];
        input.extend_from_slice(parts);
        sha256(&input).0
    }

    pub fn treasury(&self) -> Address {
        treasury_of(&self.meta.seed)
    }

    pub fn user(&self, name: &str) -> CliResult<&UserRecord> {
        self.users.get(name).ok_or_else(|| CliError::UnknownUser(name.to_string()))
    }

    /// A user name from this workspace, or a literal hex address.
    pub fn resolve_address(&self, who: &str) -> CliResult<Address> {
        if let Some(user) = self.users.get(who) {
            return Ok(user.address);
        }
        who.parse().map_err(|_| CliError::BadAddress(who.to_string()))
    }

    /// Create a user: derive keys, open an index channel, fund the address
    /// and deploy its (empty) feature contract.
    pub fn create_user(&mut self, name: &str, grant: u64) -> CliResult<&UserRecord> {
        validate_name(name, "user name")?;
        if self.users.contains_key(name) {
            return Err(CliError::DuplicateUser(name.to_string()));
        }
        let signing_seed = self.derive(&[b"user-sign", name.as_bytes()]);
        let master_key = self.derive(&[b"user-master", name.as_bytes()]);
        let key = signing_key_from_seed(&signing_seed);
        let address = Address::of_key(&key.verifying_key());
        let index_seed = sha256(&[&master_key, b"index"]).0;
        let index = Channel::new(index_seed, ChannelKind::Index, master_key);

        if grant > 0 {
            self.machine.apply(Op::Transfer { from: self.treasury(), to: address, amount: grant })?;
        }
        let deployed =
            self.machine.apply(Op::DeployFeature { owner: address, catalog: Vec::new() })?;
        let tangleshare::contracts::Applied::Deployed { contract_id } = deployed else {
            unreachable!("deploy returns a contract id");
        };

        self.users.insert(
            name.to_string(),
            UserRecord {
                name: name.to_string(),
                signing_seed,
                master_key,
                address,
                contract_id,
                index,
                features: BTreeMap::new(),
                feature_bundles: BTreeMap::new(),
            },
        );
        Ok(&self.users[name])
    }

    /// In-process key-release service with every local user registered.
    pub fn auth_service(&self) -> CliResult<AuthService> {
        let service = AuthService::new();
        for user in self.users.values() {
            let registration = UserRegistration::new_signed(
                &user.signing_key(),
                user.master_key,
                user.index.entry_root(),
                user.contract_id,
            );
            service.register(&self.machine, &registration)?;
        }
        Ok(service)
    }

    /// Commitment to the full persisted state: replaying the same commands
    /// in a fresh directory must land on the same digest.
    pub fn state_hash(&self) -> CliResult<Digest> {
        let meta = serde_json::to_string(&self.meta)?;
        let users = serde_json::to_string(&self.users)?;
        let paychans = serde_json::to_string(&self.paychans)?;
        let mut object_ids = Vec::new();
        for digest in self.store.list()? {
            object_ids.extend_from_slice(digest.as_bytes());
        }
        Ok(sha256(&[
            b"workspace-state",
            meta.as_bytes(),
            &self.tangle.dump(),
            self.machine.log_jsonl().as_bytes(),
            self.pki.to_json().as_bytes(),
            users.as_bytes(),
            paychans.as_bytes(),
            &object_ids,
        ]))
    }
}

fn treasury_of(seed: &[u8; 32]) -> Address {
    Address::of_key_bytes(&sha256(&[seed, b"treasury"]).0)
}

/// Names appear in file paths and derivations; keep them to one tidy
/// charset.
pub fn validate_name(name: &str, what: &str) -> CliResult {
    let ok = !name.is_empty()
        && name.len() <= 64
        && name.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '-');
    if ok {
        Ok(())
    } else {
        Err(CliError::Invalid(format!(
            "{what} {name:?} must be 1-64 chars of [a-z0-9-]"
        )))
    }
}

/// Parse `--seed`: 64 hex digits are used verbatim, anything else is hashed.
pub fn seed_from_arg(arg: Option<&str>) -> [u8; 32] {
    match arg {
        Some(s) => {
            if s.len() == 64 {
                if let Ok(bytes) = hex::decode(s) {
                    return bytes.try_into().expect("64 hex digits is 32 bytes");
                }
            }
            sha256(&[b"workspace-seed", s.as_bytes()]).0
        }
        None => {
            let mut seed = [0u8; 32];
            rand::Rng::fill(&mut rand::thread_rng(), &mut seed[..]);
            seed
        }
    }
}
