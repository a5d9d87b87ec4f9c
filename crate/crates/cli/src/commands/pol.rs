// Copyright 2026 tangleshare contributors
// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::Path;

use serde_json::json;

use tangleshare::crypto::signing_key_from_seed;
use tangleshare::pol::{
    build_area, issue_certificate, prove_in_area, verify_certificate, verify_in_area,
    verify_path, AreaCommitment, GeoPoint, LocationCertificate, Opening, ZkPolProof,
};

use crate::commands::print_json;
use crate::error::{CliError, CliResult};
use crate::workspace::{validate_name, Workspace};
use crate::PolCmd;

pub fn run(root: &Path, cmd: PolCmd, json: bool) -> CliResult {
    match cmd {
        PolCmd::RegisterOrd { name } => register_ord(root, &name, json),
        PolCmd::Issue { device, lat, lon, range, prover, time, out } => {
            issue(root, &device, lat, lon, range, prover.as_deref(), time, &out, json)
        }
        PolCmd::Area { lat, lon, radius, cell, salt, out } => {
            area(root, lat, lon, radius, cell, salt.as_deref(), &out, json)
        }
        PolCmd::Prove { area, lat, lon, nonce, proof_out, opening_out } => {
            prove(root, &area, lat, lon, nonce.as_deref(), &proof_out, &opening_out, json)
        }
        PolCmd::Verify { cert, area, proof, opening } => match (cert, area, proof) {
            (Some(cert), None, None) => verify_cert(root, &cert, json),
            (None, Some(area), Some(proof)) => {
                verify_proof(&area, &proof, opening.as_deref(), json)
            }
            _ => Err(CliError::Usage(
                "pass --cert FILE, or --area and --proof (and optionally --opening)".into(),
            )),
        },
    }
}

fn register_ord(root: &Path, name: &str, json: bool) -> CliResult {
    validate_name(name, "device name")?;
    let mut ws = Workspace::load(root)?;
    let key = signing_key_from_seed(&ws.derive(&[b"device", name.as_bytes()]));
    let public = key.verifying_key().to_bytes();
    ws.pki.register(name, public)?;
    ws.save()?;
    if json {
        print_json(&json!({ "ord_id": name, "public_key": hex::encode(public) }))
    } else {
        println!("registered device {name:?} with key {}", hex::encode(public));
        Ok(())
    }
}

#[allow(clippy::too_many_arguments)]
fn issue(
    root: &Path,
    device: &str,
    lat: f64,
    lon: f64,
    range: u32,
    prover: Option<&str>,
    time: u64,
    out: &Path,
    json: bool,
) -> CliResult {
    let ws = Workspace::load(root)?;
    let key = signing_key_from_seed(&ws.derive(&[b"device", device.as_bytes()]));
    let prover = match prover {
        Some(who) => ws.resolve_address(who)?,
        None => ws.treasury(),
    };
    let position = GeoPoint::from_degrees(lat, lon);
    let cert = issue_certificate(&ws.pki, &key, device, position, range, prover, time)?;
    fs::write(out, cert.to_bytes())?;
    if json {
        print_json(&json!({
            "ord_id": cert.ord_id,
            "position": cert.position,
            "range_m": cert.range_m,
            "timestamp": cert.timestamp,
            "prover": cert.prover,
            "file": out,
        }))
    } else {
        println!(
            "certificate for {} at ({lat}, {lon}) ± {range} m written to {}",
            cert.prover,
            out.display()
        );
        Ok(())
    }
}

#[allow(clippy::too_many_arguments)]
fn area(
    root: &Path,
    lat: f64,
    lon: f64,
    radius: u32,
    cell: u32,
    salt: Option<&str>,
    out: &Path,
    json: bool,
) -> CliResult {
    let ws = Workspace::load(root)?;
    let salt: [u8; 16] = match salt {
        Some(hexstr) => hex::decode(hexstr)
            .ok()
            .and_then(|b| b.try_into().ok())
            .ok_or_else(|| CliError::Usage("--salt must be 32 hex digits".into()))?,
        None => ws.derive(&[b"area-salt"])[..16].try_into().expect("16 of 32 bytes"),
    };
    let commitment = build_area(GeoPoint::from_degrees(lat, lon), radius, cell, salt)?;
    fs::write(out, serde_json::to_string_pretty(&commitment)?)?;
    if json {
        print_json(&json!({ "area": commitment, "file": out }))
    } else {
        println!(
            "committed to a {radius} m disc on a {cell} m grid, root {}",
            commitment.merkle_root
        );
        println!("commitment written to {}", out.display());
        Ok(())
    }
}

fn load_area(path: &Path) -> CliResult<AreaCommitment> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Corrupt { file: path.display().to_string(), detail: e.to_string() })
}

#[allow(clippy::too_many_arguments)]
fn prove(
    root: &Path,
    area_file: &Path,
    lat: f64,
    lon: f64,
    nonce: Option<&str>,
    proof_out: &Path,
    opening_out: &Path,
    json: bool,
) -> CliResult {
    let ws = Workspace::load(root)?;
    let area = load_area(area_file)?;
    let position = GeoPoint::from_degrees(lat, lon);
    let nonce: [u8; 32] = match nonce {
        Some(hexstr) => hex::decode(hexstr)
            .ok()
            .and_then(|b| b.try_into().ok())
            .ok_or_else(|| CliError::Usage("--nonce must be 64 hex digits".into()))?,
        None => ws.derive(&[
            b"pol-nonce",
            &position.lat_udeg.to_be_bytes(),
            &position.lon_udeg.to_be_bytes(),
        ]),
    };
    let (proof, opening) = prove_in_area(&position, &area, nonce)?;
    fs::write(proof_out, proof.to_bytes())?;
    fs::write(opening_out, opening.to_bytes())?;
    if json {
        print_json(&json!({
            "commitment": proof.commitment,
            "path_len": proof.path.len(),
            "proof": proof_out,
            "opening": opening_out,
        }))
    } else {
        println!(
            "membership proof ({}-step path) written to {}, opening to {}",
            proof.path.len(),
            proof_out.display(),
            opening_out.display()
        );
        Ok(())
    }
}

fn verify_cert(root: &Path, cert_file: &Path, json: bool) -> CliResult {
    let ws = Workspace::load(root)?;
    let cert = LocationCertificate::from_bytes(&fs::read(cert_file)?)?;
    let valid = verify_certificate(&ws.pki, &cert)?;
    if json {
        print_json(&json!({
            "valid": valid,
            "ord_id": cert.ord_id,
            "prover": cert.prover,
            "position": cert.position,
            "range_m": cert.range_m,
        }))?;
    } else if valid {
        println!(
            "valid: device {:?} places {} within {} m at time {}",
            cert.ord_id, cert.prover, cert.range_m, cert.timestamp
        );
    }
    if valid {
        Ok(())
    } else {
        Err(CliError::Invalid("certificate signature does not verify".into()))
    }
}

fn verify_proof(
    area_file: &Path,
    proof_file: &Path,
    opening_file: Option<&Path>,
    json: bool,
) -> CliResult {
    let area = load_area(area_file)?;
    let proof = ZkPolProof::from_bytes(&fs::read(proof_file)?)?;
    let (mode, valid) = match opening_file {
        Some(path) => {
            let opening = Opening::from_bytes(&fs::read(path)?)?;
            ("designated-verifier", verify_in_area(&proof, &opening, &area))
        }
        None => ("path-only", verify_path(&proof, &area)),
    };
    if json {
        print_json(&json!({ "valid": valid, "mode": mode }))?;
    } else if valid {
        println!("valid: {mode} check passed against root {}", area.merkle_root);
    }
    if valid {
        Ok(())
    } else {
        Err(CliError::Invalid(format!("{mode} verification failed")))
    }
}
