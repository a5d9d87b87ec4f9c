// Copyright 2026 tangleshare contributors
// SPDX-License-Identifier: Apache-2.0

use std::path::Path;

use serde_json::json;

use tangleshare::contracts::{Applied, ChannelStatus, Micropayer, Op, DEFAULT_CHALLENGE_PERIOD};

use crate::commands::print_json;
use crate::error::{CliError, CliResult};
use crate::workspace::{PaychanRecord, Workspace};

pub fn open(root: &Path, payer: &str, payee: &str, deposit: u64, json: bool) -> CliResult {
    let mut ws = Workspace::load(root)?;
    let payer_user = ws.user(payer)?.clone();
    let payee_addr = ws.resolve_address(payee)?;
    let applied = ws.machine.apply(Op::OpenChannel {
        payer: payer_user.address,
        payee: payee_addr,
        deposit,
    })?;
    let Applied::ChannelOpened { channel_id } = applied else {
        unreachable!("open returns a channel id");
    };
    ws.paychans.insert(
        channel_id,
        PaychanRecord {
            channel_id,
            payer: payer.to_string(),
            payee: payee_addr,
            cumulative: 0,
            seq: 0,
            latest_proof: None,
        },
    );
    ws.save()?;
    if json {
        print_json(&json!({
            "channel_id": channel_id,
            "payer": payer_user.address,
            "payee": payee_addr,
            "deposit": deposit,
            "payer_balance": ws.machine.balance_of(&payer_user.address),
        }))
    } else {
        println!("opened channel {channel_id}: {deposit} tokens escrowed for {payee_addr}");
        println!("payer balance is now {}", ws.machine.balance_of(&payer_user.address));
        Ok(())
    }
}

pub fn pay(root: &Path, channel_id: u64, amount: u64, json: bool) -> CliResult {
    let mut ws = Workspace::load(root)?;
    let record = ws
        .paychans
        .get(&channel_id)
        .cloned()
        .ok_or(CliError::UnknownPaychan(channel_id))?;
    let payer_key = ws.user(&record.payer)?.signing_key();
    let channel = ws
        .machine
        .channel(channel_id)
        .ok_or(CliError::UnknownPaychan(channel_id))?;

    // Rebuild the payer-side session at the stored cursor and extend it.
    let mut payer = Micropayer::resume(channel, payer_key, record.cumulative, record.seq)?;
    let proof = payer.pay(amount)?;
    let deposit = channel.deposit;

    let record = ws.paychans.get_mut(&channel_id).expect("present above");
    record.cumulative = proof.cumulative;
    record.seq = proof.seq;
    record.latest_proof = Some(proof.clone());
    ws.save()?;
    if json {
        print_json(&json!({
            "channel_id": channel_id,
            "paid": amount,
            "cumulative": proof.cumulative,
            "seq": proof.seq,
            "remaining": deposit - proof.cumulative,
        }))
    } else {
        println!(
            "paid {amount} off-chain on channel {channel_id}: cumulative {} of {deposit} (proof #{})",
            proof.cumulative, proof.seq
        );
        Ok(())
    }
}

pub fn close(root: &Path, channel_id: u64, by_payer: bool, json: bool) -> CliResult {
    let mut ws = Workspace::load(root)?;
    let record = ws
        .paychans
        .get(&channel_id)
        .cloned()
        .ok_or(CliError::UnknownPaychan(channel_id))?;
    let payer_addr = ws.user(&record.payer)?.address;
    let closer = if by_payer { payer_addr } else { record.payee };

    let before_payer = ws.machine.balance_of(&payer_addr);
    let before_payee = ws.machine.balance_of(&record.payee);
    ws.machine.apply(Op::CloseChannel {
        channel_id,
        closer,
        proof: record.latest_proof.clone(),
    })?;
    // A payee close settles at once; a payer close opens a challenge
    // window, which this single-operator workspace fast-forwards through.
    let closing = ws
        .machine
        .channel(channel_id)
        .is_some_and(|c| matches!(c.status, ChannelStatus::Closing { .. }));
    if closing {
        ws.machine.apply(Op::AdvanceTime { ticks: DEFAULT_CHALLENGE_PERIOD })?;
        ws.machine.apply(Op::FinalizeClose { channel_id })?;
    }
    ws.save()?;

    let paid = ws.machine.balance_of(&record.payee) - before_payee;
    let refunded = ws.machine.balance_of(&payer_addr) - before_payer;
    if json {
        print_json(&json!({
            "channel_id": channel_id,
            "closed_by": closer,
            "payee_received": paid,
            "payer_refunded": refunded,
            "payer_balance": ws.machine.balance_of(&payer_addr),
            "payee_balance": ws.machine.balance_of(&record.payee),
        }))
    } else {
        println!("channel {channel_id} settled: payee received {paid}, payer refunded {refunded}");
        Ok(())
    }
}
