// Copyright 2026 tangleshare contributors
// SPDX-License-Identifier: Apache-2.0

//! Proof-of-location.
//!
//! Two mechanisms, combinable:
//!
//! * **Certificates** — a registered on-road device signs an attestation
//!   that a prover was within radio range of its position at some time.
//! * **In-area proofs** — a prover shows its position falls inside a
//!   committed service area without revealing exact coordinates. The area
//!   owner publishes a Merkle root over all salted grid cells inside the
//!   area radius; the prover reveals a cell commitment plus a Merkle path,
//!   and opens the commitment only to the designated verifier. Privacy is
//!   therefore exactly cell-sized: the designated verifier learns the cell,
//!   third parties learn only salted hashes.
//!
//! Positions are (latitude, longitude) in microdegrees. Metric distances
//! use a local equirectangular projection about the area center, which is
//! accurate at service-area scale (up to a few kilometres).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{CodecError, Reader, Writer};
use crate::crypto::{sha256, sign, verify_signature, Address, Digest};

/// Metres per degree of latitude (and of longitude at the equator).
const METERS_PER_DEGREE: f64 = 111_320.0;

/// Hard cap on enumerable area cells.
pub const MAX_AREA_CELLS: u64 = 1_000_000;

/// Default grid granularity in metres; the privacy/precision trade-off.
pub const DEFAULT_CELL_M: u32 = 100;

#[derive(Debug, Error)]
pub enum PolError {
    #[error("device {0:?} is not registered")]
    UnregisteredDevice(String),
    #[error("device {0:?} already registered")]
    AlreadyRegistered(String),
    #[error("signing key does not match the registered key for {0:?}")]
    DeviceKeyMismatch(String),
    #[error("area would span {cells} cells, more than the limit of {MAX_AREA_CELLS}")]
    AreaTooLarge { cells: u64 },
    #[error("invalid area parameters: {0}")]
    InvalidArea(&'static str),
    #[error("position is outside the committed area")]
    OutsideArea,
    #[error(transparent)]
    Codec(#[from] CodecError),
}

/// A geographic position in microdegrees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat_udeg: i64,
    pub lon_udeg: i64,
}

impl GeoPoint {
    pub fn from_degrees(lat: f64, lon: f64) -> Self {
        Self { lat_udeg: (lat * 1e6).round() as i64, lon_udeg: (lon * 1e6).round() as i64 }
    }
}

/// East/north offset of `point` from `origin`, in metres, equirectangular.
fn project(origin: &GeoPoint, point: &GeoPoint) -> (f64, f64) {
    let lat0 = (origin.lat_udeg as f64) * 1e-6 * std::f64::consts::PI / 180.0;
    let x = (point.lon_udeg - origin.lon_udeg) as f64 * 1e-6 * lat0.cos() * METERS_PER_DEGREE;
    let y = (point.lat_udeg - origin.lat_udeg) as f64 * 1e-6 * METERS_PER_DEGREE;
    (x, y)
}

// ---------------------------------------------------------------------------
// PKI registry and location certificates
// ---------------------------------------------------------------------------

/// Append-only map of on-road device ids to their public keys.
#[derive(Debug, Default, Clone, Serialize, Deserialize)]
pub struct PkiRegistry {
    devices: BTreeMap<String, DeviceKeyHex>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct DeviceKeyHex(#[serde(with = "hex::serde")] [u8; 32]);

impl PkiRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, ord_id: &str, public_key: [u8; 32]) -> Result<(), PolError> {
        if self.devices.contains_key(ord_id) {
            return Err(PolError::AlreadyRegistered(ord_id.to_string()));
        }
        self.devices.insert(ord_id.to_string(), DeviceKeyHex(public_key));
        Ok(())
    }

    pub fn key_of(&self, ord_id: &str) -> Option<[u8; 32]> {
        self.devices.get(ord_id).map(|k| k.0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("registry serializes")
    }

    pub fn from_json(json: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(json)
    }
}

/// A device's signed attestation that `prover` was within `range_m` of
/// `position` at `timestamp`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocationCertificate {
    pub ord_id: String,
    pub position: GeoPoint,
    pub range_m: u32,
    pub timestamp: u64,
    pub prover: Address,
    #[serde(with = "hex::serde")]
    pub signature: [u8; 64],
}

impl LocationCertificate {
    fn signed_bytes(
        ord_id: &str,
        position: &GeoPoint,
        range_m: u32,
        timestamp: u64,
        prover: &Address,
    ) -> Vec<u8> {
        let mut w = Writer::new();
        w.put_str(ord_id)
            .put_i64(position.lat_udeg)
            .put_i64(position.lon_udeg)
            .put_u32(range_m)
            .put_u64(timestamp)
            .put_address(prover);
        w.finish()
    }

    /// Canonical binary form, for files and certificate payloads.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.put_str(&self.ord_id)
            .put_i64(self.position.lat_udeg)
            .put_i64(self.position.lon_udeg)
            .put_u32(self.range_m)
            .put_u64(self.timestamp)
            .put_address(&self.prover)
            .put_raw(&self.signature);
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, PolError> {
        let mut r = Reader::new(bytes);
        let cert = LocationCertificate {
            ord_id: r.get_str()?,
            position: GeoPoint { lat_udeg: r.get_i64()?, lon_udeg: r.get_i64()? },
            range_m: r.get_u32()?,
            timestamp: r.get_u64()?,
            prover: r.get_address()?,
            signature: r.get_raw(64)?.try_into().expect("fixed width"),
        };
        r.expect_end()?;
        Ok(cert)
    }
}

/// Sign a certificate as device `ord_id`. The key must match the registry.
pub fn issue_certificate(
    registry: &PkiRegistry,
    ord_key: &ed25519_dalek::SigningKey,
    ord_id: &str,
    position: GeoPoint,
    range_m: u32,
    prover: Address,
    timestamp: u64,
) -> Result<LocationCertificate, PolError> {
    let registered =
        registry.key_of(ord_id).ok_or_else(|| PolError::UnregisteredDevice(ord_id.to_string()))?;
    if registered != ord_key.verifying_key().to_bytes() {
        return Err(PolError::DeviceKeyMismatch(ord_id.to_string()));
    }
    let bytes = LocationCertificate::signed_bytes(ord_id, &position, range_m, timestamp, &prover);
    Ok(LocationCertificate {
        ord_id: ord_id.to_string(),
        position,
        range_m,
        timestamp,
        prover,
        signature: sign(ord_key, &bytes),
    })
}

/// Check a certificate against the registry. `Err` for unknown devices,
/// `Ok(false)` for bad signatures.
pub fn verify_certificate(
    registry: &PkiRegistry,
    cert: &LocationCertificate,
) -> Result<bool, PolError> {
    let key = registry
        .key_of(&cert.ord_id)
        .ok_or_else(|| PolError::UnregisteredDevice(cert.ord_id.clone()))?;
    let bytes = LocationCertificate::signed_bytes(
        &cert.ord_id,
        &cert.position,
        cert.range_m,
        cert.timestamp,
        &cert.prover,
    );
    Ok(verify_signature(&key, &bytes, &cert.signature))
}

// ---------------------------------------------------------------------------
// Committed service areas and in-area proofs
// ---------------------------------------------------------------------------

/// A grid cell in the area's local projection.
pub type Cell = (i64, i64);

fn cell_bytes(cell: Cell) -> [u8; 16] {
    let mut out = [0u8; 16];
    out[..8].copy_from_slice(&cell.0.to_be_bytes());
    out[8..].copy_from_slice(&cell.1.to_be_bytes());
    out
}

fn leaf_of(cell: Cell, epoch_salt: &[u8; 16]) -> Digest {
    sha256(&[&cell_bytes(cell), epoch_salt])
}

fn commitment_of(cell: Cell, nonce: &[u8; 32]) -> Digest {
    sha256(&[&cell_bytes(cell), nonce])
}

/// Public commitment to a circular service area: anyone can recompute the
/// Merkle root from these fields.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AreaCommitment {
    pub center: GeoPoint,
    pub radius_m: u32,
    pub cell_m: u32,
    #[serde(with = "hex::serde")]
    pub epoch_salt: [u8; 16],
    pub merkle_root: Digest,
}

/// Cell containing `position` on the grid of the given area center. The
/// grid is aligned so that cell (0, 0) is centered on the area center,
/// which guarantees the committed set is never empty for a positive radius.
pub fn cell_of(center: &GeoPoint, cell_m: u32, position: &GeoPoint) -> Cell {
    let (x, y) = project(center, position);
    let cell = cell_m as f64;
    ((x / cell + 0.5).floor() as i64, (y / cell + 0.5).floor() as i64)
}

/// All grid cells whose center lies within `radius_m` of the area center,
/// sorted. This is the committed set, recomputable by anyone.
pub fn enumerate_cells(radius_m: u32, cell_m: u32) -> Result<Vec<Cell>, PolError> {
    if radius_m == 0 || cell_m == 0 {
        return Err(PolError::InvalidArea("radius and cell size must be positive"));
    }
    let radius = radius_m as f64;
    let cell = cell_m as f64;
    let span = (radius / cell).ceil() as i64 + 1;
    let estimated = (2 * span + 1) as u64;
    let estimated = estimated * estimated;
    if estimated > MAX_AREA_CELLS {
        return Err(PolError::AreaTooLarge { cells: estimated });
    }
    let mut cells = Vec::new();
    for i in -span..=span {
        for j in -span..=span {
            let cx = i as f64 * cell;
            let cy = j as f64 * cell;
            if (cx * cx + cy * cy).sqrt() <= radius {
                cells.push((i, j));
            }
        }
    }
    cells.sort_unstable();
    Ok(cells)
}

/// Merkle tree over sorted leaves; an odd node at any level is promoted
/// unchanged to the next level.
struct MerkleTree {
    levels: Vec<Vec<Digest>>,
}

impl MerkleTree {
    fn build(leaves: Vec<Digest>) -> Self {
        assert!(!leaves.is_empty(), "tree needs at least one leaf");
        let mut levels = vec![leaves];
        while levels.last().unwrap().len() > 1 {
            let prev = levels.last().unwrap();
            let mut next = Vec::with_capacity(prev.len().div_ceil(2));
            for pair in prev.chunks(2) {
                next.push(match pair {
                    [left, right] => sha256(&[&left.0, &right.0]),
                    [lone] => *lone,
                    _ => unreachable!(),
                });
            }
            levels.push(next);
        }
        MerkleTree { levels }
    }

    fn root(&self) -> Digest {
        self.levels.last().unwrap()[0]
    }

    fn path_for(&self, mut index: usize) -> Vec<PathStep> {
        let mut path = Vec::new();
        for level in &self.levels[..self.levels.len() - 1] {
            let sibling = index ^ 1;
            if sibling < level.len() {
                path.push(PathStep {
                    sibling: level[sibling],
                    sibling_on_right: sibling > index,
                });
            }
            index /= 2;
        }
        path
    }
}

/// One Merkle path element: the sibling digest and which side it sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathStep {
    pub sibling: Digest,
    pub sibling_on_right: bool,
}

fn fold_path(leaf: &Digest, path: &[PathStep]) -> Digest {
    let mut acc = *leaf;
    for step in path {
        acc = if step.sibling_on_right {
            sha256(&[&acc.0, &step.sibling.0])
        } else {
            sha256(&[&step.sibling.0, &acc.0])
        };
    }
    acc
}

/// Publicly shareable part of an in-area proof.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZkPolProof {
    pub commitment: Digest,
    pub leaf: Digest,
    pub path: Vec<PathStep>,
}

/// Revealed only to the designated verifier.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Opening {
    pub cell: Cell,
    #[serde(with = "hex::serde")]
    pub nonce: [u8; 32],
}

impl ZkPolProof {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.put_digest(&self.commitment).put_digest(&self.leaf).put_u32(self.path.len() as u32);
        for step in &self.path {
            w.put_digest(&step.sibling).put_u8(step.sibling_on_right as u8);
        }
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, PolError> {
        let mut r = Reader::new(bytes);
        let commitment = r.get_digest()?;
        let leaf = r.get_digest()?;
        let n = r.get_u32()? as usize;
        let mut path = Vec::with_capacity(n);
        for _ in 0..n {
            path.push(PathStep {
                sibling: r.get_digest()?,
                sibling_on_right: r.get_u8()? != 0,
            });
        }
        r.expect_end()?;
        Ok(ZkPolProof { commitment, leaf, path })
    }
}

impl Opening {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.put_i64(self.cell.0).put_i64(self.cell.1).put_raw(&self.nonce);
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, PolError> {
        let mut r = Reader::new(bytes);
        let opening = Opening {
            cell: (r.get_i64()?, r.get_i64()?),
            nonce: r.get_raw(32)?.try_into().expect("fixed width"),
        };
        r.expect_end()?;
        Ok(opening)
    }
}

/// Commit to the service area: enumerate the in-radius cells, salt them and
/// build the Merkle root.
pub fn build_area(
    center: GeoPoint,
    radius_m: u32,
    cell_m: u32,
    epoch_salt: [u8; 16],
) -> Result<AreaCommitment, PolError> {
    let cells = enumerate_cells(radius_m, cell_m)?;
    let leaves: Vec<Digest> = cells.iter().map(|c| leaf_of(*c, &epoch_salt)).collect();
    let tree = MerkleTree::build(leaves);
    Ok(AreaCommitment { center, radius_m, cell_m, epoch_salt, merkle_root: tree.root() })
}

/// Prove `position` lies in the area. The nonce is prover-chosen and keeps
/// the commitment unlinkable across proofs from the same cell.
pub fn prove_in_area(
    position: &GeoPoint,
    area: &AreaCommitment,
    nonce: [u8; 32],
) -> Result<(ZkPolProof, Opening), PolError> {
    let cells = enumerate_cells(area.radius_m, area.cell_m)?;
    let cell = cell_of(&area.center, area.cell_m, position);
    let index = cells.binary_search(&cell).map_err(|_| PolError::OutsideArea)?;
    let leaves: Vec<Digest> = cells.iter().map(|c| leaf_of(*c, &area.epoch_salt)).collect();
    let tree = MerkleTree::build(leaves);
    let proof = ZkPolProof {
        commitment: commitment_of(cell, &nonce),
        leaf: leaf_of(cell, &area.epoch_salt),
        path: tree.path_for(index),
    };
    Ok((proof, Opening { cell, nonce }))
}

/// Third-party check: does the leaf authenticate under the area root?
/// Learns nothing about the cell beyond its salted hash.
pub fn verify_path(proof: &ZkPolProof, area: &AreaCommitment) -> bool {
    fold_path(&proof.leaf, &proof.path) == area.merkle_root
}

/// Designated-verifier check: path authenticates, the opening's cell hashes
/// to the leaf under the epoch salt, and the commitment opens to the same
/// cell and nonce.
pub fn verify_in_area(proof: &ZkPolProof, opening: &Opening, area: &AreaCommitment) -> bool {
    verify_path(proof, area)
        && leaf_of(opening.cell, &area.epoch_salt) == proof.leaf
        && commitment_of(opening.cell, &opening.nonce) == proof.commitment
}
