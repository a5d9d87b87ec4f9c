// Copyright 2026 tangleshare contributors
// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::Path;

use serde_json::json;

use tangleshare::contracts::{DataBundle, ItemRef, Op};
use tangleshare::crypto::sha256;
use tangleshare::mam::{Channel, ChannelKind, Published};
use tangleshare::payload::Payload;
use tangleshare::store::{stash, INLINE_MAX_DEFAULT};

use crate::commands::print_json;
use crate::error::{CliError, CliResult};
use crate::workspace::{validate_name, Workspace};
use crate::PublishArgs;

pub fn run(root: &Path, args: &PublishArgs, json: bool) -> CliResult {
    validate_name(&args.feature, "feature name")?;
    let data = match (&args.datum, &args.file) {
        (Some(datum), None) => datum.clone().into_bytes(),
        (None, Some(path)) => fs::read(path)?,
        _ => {
            return Err(CliError::Usage(
                "provide the datum as an argument or via --file, but not both".into(),
            ))
        }
    };
    let cert_bytes = args.cert.as_ref().map(fs::read).transpose()?;

    let mut ws = Workspace::load(root)?;
    let network = ws.meta.network.clone();
    if !ws.users.contains_key(&args.user) {
        return Err(CliError::UnknownUser(args.user.clone()));
    }

    // First publish on a feature: create the session channel, announce it
    // on the user's index channel, and list it in the feature contract.
    let mut new_bundle = None;
    if !ws.users[&args.user].features.contains_key(&args.feature) {
        let user = ws.users.get_mut(&args.user).expect("checked above");
        let seed = sha256(&[&user.master_key, b"session", args.feature.as_bytes()]).0;
        let channel = Channel::new(seed, ChannelKind::Session, user.master_key);
        let entry_root = channel.entry_root();
        user.index.publish(
            &ws.tangle,
            &network,
            &Payload::ChannelRef { kind: ChannelKind::Session, root: entry_root },
        )?;
        user.features.insert(args.feature.clone(), channel);

        let bundle_id = user.feature_bundles.len() as u64;
        user.feature_bundles.insert(args.feature.clone(), bundle_id);
        let (owner, contract_id) = (user.address, user.contract_id);
        ws.machine.apply(Op::AddBundle {
            owner,
            contract_id,
            bundle: DataBundle {
                id: bundle_id,
                items: vec![ItemRef::Channel {
                    channel_kind: ChannelKind::Session,
                    entry_root,
                }],
                price: args.price,
            },
        })?;
        new_bundle = Some(bundle_id);
    }

    let user = ws.users.get_mut(&args.user).expect("checked above");
    let channel = user.features.get_mut(&args.feature).expect("created above");
    let msg_index = channel.next_index();
    let msg_key = channel.message_key_at(msg_index);
    let payload = stash(&ws.store, &msg_key, &data, INLINE_MAX_DEFAULT)?;
    let published = channel.publish(&ws.tangle, &network, &payload)?;

    let cert_published = match cert_bytes {
        Some(bytes) => Some(channel.publish(&ws.tangle, &network, &Payload::Certificate(bytes))?),
        None => None,
    };
    let bundle_id = user.feature_bundles[&args.feature];
    ws.save()?;

    let describe = |p: &Published, kind: &str| {
        json!({
            "root": p.root,
            "address": p.address,
            "transactions": p.bundle.len(),
            "payload": kind,
        })
    };
    let payload_kind = match payload {
        Payload::Inline(_) => "inline",
        Payload::ObjectRef(_) => "object-ref",
        _ => unreachable!("stash yields inline or object-ref"),
    };
    let mut out = json!({
        "user": args.user,
        "feature": args.feature,
        "bundle": bundle_id,
        "new_bundle": new_bundle.is_some(),
        "message_index": msg_index,
        "message": describe(&published, payload_kind),
    });
    if let Some(p) = &cert_published {
        out["certificate"] = describe(p, "certificate");
    }
    if json {
        print_json(&out)
    } else {
        if let Some(id) = new_bundle {
            println!(
                "created feature {:?}: session channel {}, bundle {} at price {}",
                args.feature,
                published.root,
                id,
                args.price
            );
        }
        println!(
            "published message {} on {:?}: {} bytes as {}, {} transactions, root {}",
            msg_index,
            args.feature,
            data.len(),
            payload_kind,
            published.bundle.len(),
            published.root
        );
        if let Some(p) = &cert_published {
            println!("attached certificate as message {}, root {}", msg_index + 1, p.root);
        }
        Ok(())
    }
}
