// Copyright 2026 tangleshare contributors
// SPDX-License-Identifier: Apache-2.0

//! Deterministic discrete-event simulator for end-to-end message latency.
//!
//! A scenario pins a client profile (local bundle preparation, network round
//! trip) against a provider profile (tip-selection latency, proof-of-work
//! throughput, availability, optional rate limiting) on a given network
//! difficulty, then replays a fixed number of message submissions on a
//! simulated millisecond clock. Every random draw comes from one seeded
//! stream per scenario, so a scenario's output is byte-identical across
//! runs. Proof-of-work time is simulated — attempt counts are sampled from
//! the geometric distribution the real nonce search follows — because real
//! difficulty-14 hashing is exercised elsewhere at low difficulty.
//!
//! Scenarios meant to be compared pairwise (same provider, different
//! clients) should use the same seed and the same distribution *families*
//! so the random streams stay aligned; then per-message differences reflect
//! only the profile parameters, not sampling noise.

pub mod presets;

use std::collections::VecDeque;
use std::fmt;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ledger::NetworkConfig;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimError {
    #[error("no records to summarize")]
    EmptyInput,
}

/// A latency distribution, in milliseconds.
///
/// `LogNormal` is parameterized by its arithmetic mean (not the median), so
/// profile numbers read directly as expected values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dist {
    Constant(f64),
    LogNormal { mean_ms: f64, sigma: f64 },
}

impl Dist {
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            Dist::Constant(ms) => ms,
            Dist::LogNormal { mean_ms, sigma } => {
                let mu = mean_ms.ln() - sigma * sigma / 2.0;
                LogNormal::new(mu, sigma).expect("finite parameters").sample(rng)
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Dist::Constant(ms) => ms,
            Dist::LogNormal { mean_ms, .. } => mean_ms,
        }
    }
}

/// Sliding-window submission cap enforced by a provider.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateLimit {
    pub max_messages: u32,
    pub window_ms: u64,
}

/// A full node that accepts submissions on behalf of clients: it selects
/// tips, performs proof-of-work at `pow_rate` attempts per second, and
/// answers each request with probability `availability` (failures cost the
/// client a retry round trip; they never reject the message outright).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeProfile {
    pub name: String,
    pub tips: Dist,
    pub pow_rate: f64,
    pub availability: f64,
    #[serde(default)]
    pub rate_limit: Option<RateLimit>,
}

/// A client machine: local bundle preparation cost plus the network round
/// trip to the provider.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClientProfile {
    pub name: String,
    pub bundle: Dist,
    pub rtt: Dist,
}

/// One run configuration. `send_rate` is messages per second; `None` means
/// each message is prepared as soon as the previous one finishes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    pub messages: u32,
    #[serde(default)]
    pub send_rate: Option<f64>,
    pub client: ClientProfile,
    pub provider: NodeProfile,
    pub network: NetworkConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Accepted,
    RejectedRateLimit,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Accepted => f.write_str("accepted"),
            Outcome::RejectedRateLimit => f.write_str("rejected:rate-limit"),
        }
    }
}

/// Per-message timing breakdown. All figures are milliseconds; `msg_index`
/// is 1-based; `total_ms` is exactly the sum of the four phases. Rejected
/// messages only pay bundle preparation and the refusal round trip.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatencyRecord {
    pub msg_index: u32,
    pub bundle_ms: f64,
    pub tips_ms: f64,
    pub pow_ms: f64,
    pub net_ms: f64,
    pub total_ms: f64,
    pub outcome: Outcome,
}

/// Number of hash attempts until success when each attempt independently
/// succeeds with probability 2^-difficulty, sampled by inverting the
/// geometric CDF at `u`. Monotone in both arguments, which keeps
/// fixed-stream comparisons across difficulties honest.
fn geometric_attempts(u: f64, difficulty: u32) -> u64 {
    let p = 0.5f64.powi(difficulty as i32);
    let denom = (1.0 - p).ln();
    let x = (1.0 - u).ln() / denom;
    (x.floor() as u64) + 1
}

/// Cap on availability retries so a pathological profile cannot loop
/// forever; at realistic availabilities it is never reached.
const MAX_RETRIES: u32 = 1_000;

/// Replay a scenario on a simulated clock and return one record per message.
pub fn run_scenario(scenario: &Scenario) -> Vec<LatencyRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let mut clock_ms = 0.0f64;
    let mut window: VecDeque<f64> = VecDeque::new();
    let mut records = Vec::with_capacity(scenario.messages as usize);

    for msg_index in 1..=scenario.messages {
        // Pacing delays the start of a message but never overlaps two:
        // the client is strictly sequential.
        let scheduled_ms = scenario
            .send_rate
            .map(|rate| (msg_index - 1) as f64 * 1000.0 / rate)
            .unwrap_or(0.0);
        let start_ms = clock_ms.max(scheduled_ms);

        let bundle_ms = scenario.client.bundle.sample(&mut rng);

        // Unavailable provider: the request goes unanswered and the client
        // retries, paying one extra round trip per failed try.
        let mut retry_ms = 0.0;
        for _ in 0..MAX_RETRIES {
            if rng.gen::<f64>() < scenario.provider.availability {
                break;
            }
            retry_ms += scenario.client.rtt.sample(&mut rng);
        }

        let arrival_ms = start_ms + bundle_ms + retry_ms;
        let over_limit = match scenario.provider.rate_limit {
            Some(limit) => {
                let horizon = arrival_ms - limit.window_ms as f64;
                while window.front().is_some_and(|&t| t <= horizon) {
                    window.pop_front();
                }
                window.len() >= limit.max_messages as usize
            }
            None => false,
        };

        let record = if over_limit {
            let net_ms = retry_ms + scenario.client.rtt.sample(&mut rng);
            LatencyRecord {
                msg_index,
                bundle_ms,
                tips_ms: 0.0,
                pow_ms: 0.0,
                net_ms,
                total_ms: bundle_ms + net_ms,
                outcome: Outcome::RejectedRateLimit,
            }
        } else {
            if scenario.provider.rate_limit.is_some() {
                window.push_back(arrival_ms);
            }
            let tips_ms = scenario.provider.tips.sample(&mut rng);
            let attempts = geometric_attempts(rng.gen::<f64>(), scenario.network.difficulty);
            let pow_ms = attempts as f64 * 1000.0 / scenario.provider.pow_rate;
            let net_ms = retry_ms + scenario.client.rtt.sample(&mut rng);
            let total_ms = bundle_ms + tips_ms + pow_ms + net_ms;
            LatencyRecord {
                msg_index,
                bundle_ms,
                tips_ms,
                pow_ms,
                net_ms,
                total_ms,
                outcome: Outcome::Accepted,
            }
        };
        clock_ms = start_ms + record.total_ms;
        records.push(record);
    }
    records
}

/// Latency statistics over the accepted messages of one run; absent from
/// [`Summary`] when nothing was accepted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatencyStats {
    pub mean_ms: f64,
    pub median_ms: f64,
    pub p95_ms: f64,
    pub min_ms: f64,
    pub max_ms: f64,
    pub bundle_mean_ms: f64,
    pub tips_mean_ms: f64,
    pub pow_mean_ms: f64,
    pub net_mean_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub scenario: String,
    pub sent: u32,
    pub accepted: u32,
    pub rejected: u32,
    pub acceptance_rate: f64,
    pub latency: Option<LatencyStats>,
}

pub fn summarize(scenario_name: &str, records: &[LatencyRecord]) -> Result<Summary, SimError> {
    if records.is_empty() {
        return Err(SimError::EmptyInput);
    }
    let accepted: Vec<&LatencyRecord> =
        records.iter().filter(|r| r.outcome == Outcome::Accepted).collect();
    let mut totals: Vec<f64> = accepted.iter().map(|r| r.total_ms).collect();
    totals.sort_by(|a, b| a.partial_cmp(b).expect("latencies are finite"));

    let latency = if totals.is_empty() {
        None
    } else {
        let n = totals.len() as f64;
        let percentile = |q: f64| -> f64 {
            let rank = (q * totals.len() as f64).ceil() as usize;
            totals[rank.clamp(1, totals.len()) - 1]
        };
        let phase_mean =
            |f: fn(&LatencyRecord) -> f64| accepted.iter().map(|r| f(r)).sum::<f64>() / n;
        Some(LatencyStats {
            mean_ms: totals.iter().sum::<f64>() / n,
            median_ms: percentile(0.5),
            p95_ms: percentile(0.95),
            min_ms: totals[0],
            max_ms: totals[totals.len() - 1],
            bundle_mean_ms: phase_mean(|r| r.bundle_ms),
            tips_mean_ms: phase_mean(|r| r.tips_ms),
            pow_mean_ms: phase_mean(|r| r.pow_ms),
            net_mean_ms: phase_mean(|r| r.net_ms),
        })
    };
    Ok(Summary {
        scenario: scenario_name.to_string(),
        sent: records.len() as u32,
        accepted: accepted.len() as u32,
        rejected: (records.len() - accepted.len()) as u32,
        acceptance_rate: accepted.len() as f64 / records.len() as f64,
        latency,
    })
}

/// Run each scenario and summarize it, preserving order.
pub fn compare_scenarios(scenarios: &[Scenario]) -> Result<Vec<Summary>, SimError> {
    scenarios
        .iter()
        .map(|s| summarize(&s.name, &run_scenario(s)))
        .collect()
}

/// Fixed-width histogram of accepted total latencies.
#[derive(Debug, Clone)]
pub struct Histogram {
    bin_ms: f64,
    counts: std::collections::BTreeMap<u64, u64>,
}

impl Histogram {
    pub fn new(bin_ms: f64) -> Self {
        assert!(bin_ms > 0.0, "bin width must be positive");
        Self { bin_ms, counts: Default::default() }
    }

    pub fn add(&mut self, value_ms: f64) {
        let bin = (value_ms / self.bin_ms).floor() as u64;
        *self.counts.entry(bin).or_insert(0) += 1;
    }

    pub fn from_records(records: &[LatencyRecord], bin_ms: f64) -> Self {
        let mut h = Self::new(bin_ms);
        for r in records.iter().filter(|r| r.outcome == Outcome::Accepted) {
            h.add(r.total_ms);
        }
        h
    }

    pub fn csv(&self) -> String {
        let mut out = String::from("bin_start_ms,count\n");
        for (bin, count) in &self.counts {
            writeln!(out, "{:.3},{}", *bin as f64 * self.bin_ms, count).unwrap();
        }
        out
    }
}

/// One CSV row per message, three decimals on every latency column.
pub fn records_csv(records: &[LatencyRecord]) -> String {
    let mut out = String::from("msg_index,bundle_ms,tips_ms,pow_ms,net_ms,total_ms,outcome\n");
    for r in records {
        writeln!(
            out,
            "{},{:.3},{:.3},{:.3},{:.3},{:.3},{}",
            r.msg_index, r.bundle_ms, r.tips_ms, r.pow_ms, r.net_ms, r.total_ms, r.outcome
        )
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixed_scenario(difficulty: u32, seed: u64) -> Scenario {
        Scenario {
            name: "test".into(),
            seed,
            messages: 30,
            send_rate: None,
            client: ClientProfile {
                name: "client".into(),
                bundle: Dist::LogNormal { mean_ms: 100.0, sigma: 0.1 },
                rtt: Dist::LogNormal { mean_ms: 20.0, sigma: 0.1 },
            },
            provider: NodeProfile {
                name: "node".into(),
                tips: Dist::LogNormal { mean_ms: 50.0, sigma: 0.2 },
                pow_rate: 5_000.0,
                availability: 1.0,
                rate_limit: None,
            },
            network: NetworkConfig::new("sim", difficulty, 1024),
        }
    }

    #[test]
    fn identical_runs_produce_identical_csv() {
        let scenario = fixed_scenario(10, 42);
        let a = records_csv(&run_scenario(&scenario));
        let b = records_csv(&run_scenario(&scenario));
        assert_eq!(a, b);
        assert!(a.starts_with("msg_index,bundle_ms,tips_ms,pow_ms,net_ms,total_ms,outcome\n"));
        assert_eq!(a.lines().count(), 31);
    }

    #[test]
    fn scenario_round_trips_through_json() {
        let scenario = fixed_scenario(9, 1);
        let json = serde_json::to_string_pretty(&scenario).unwrap();
        let back: Scenario = serde_json::from_str(&json).unwrap();
        assert_eq!(back, scenario);
        assert_eq!(run_scenario(&back), run_scenario(&scenario));
    }

    #[test]
    fn higher_difficulty_never_speeds_up_any_message() {
        let easy = run_scenario(&fixed_scenario(9, 7));
        let hard = run_scenario(&fixed_scenario(14, 7));
        assert_eq!(easy.len(), hard.len());
        for (e, h) in easy.iter().zip(&hard) {
            // Same seed and draw order, so only the proof-of-work term moves.
            assert_eq!(e.bundle_ms, h.bundle_ms);
            assert_eq!(e.tips_ms, h.tips_ms);
            assert!(h.pow_ms >= e.pow_ms, "msg {}: {} < {}", e.msg_index, h.pow_ms, e.pow_ms);
        }
    }

    #[test]
    fn accepted_totals_are_exact_phase_sums() {
        for r in run_scenario(&fixed_scenario(10, 13)) {
            assert_eq!(r.total_ms, r.bundle_ms + r.tips_ms + r.pow_ms + r.net_ms);
        }
    }

    #[test]
    fn zero_difficulty_zero_latency_profiles_cost_only_bundle_time() {
        let mut scenario = fixed_scenario(0, 2);
        scenario.client.bundle = Dist::Constant(17.0);
        scenario.client.rtt = Dist::Constant(0.0);
        scenario.provider.tips = Dist::Constant(0.0);
        scenario.provider.pow_rate = f64::INFINITY;
        for r in run_scenario(&scenario) {
            assert_eq!(r.total_ms, 17.0);
        }
    }

    #[test]
    fn geometric_sampler_matches_expected_attempt_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n = 20_000;
        let total: u64 = (0..n).map(|_| geometric_attempts(rng.gen(), 8)).sum();
        let mean = total as f64 / n as f64;
        // True mean is 256 with sd 255.5; the sample mean over 20k draws
        // stays within a few standard errors (~1.8) of it.
        assert!((mean - 256.0).abs() < 12.0, "mean attempts {mean}");
        assert_eq!(geometric_attempts(0.0, 8), 1);
        assert_eq!(geometric_attempts(0.0, 0), 1);
        assert!(geometric_attempts(0.999_999, 14) > 100_000);
    }

    #[test]
    fn rate_limit_rejects_after_cap_within_window() {
        let mut scenario = fixed_scenario(6, 3);
        scenario.messages = 12;
        scenario.provider.rate_limit =
            Some(RateLimit { max_messages: 5, window_ms: 3_600_000 });
        let records = run_scenario(&scenario);
        for r in &records[..5] {
            assert_eq!(r.outcome, Outcome::Accepted);
        }
        for r in &records[5..] {
            assert_eq!(r.outcome, Outcome::RejectedRateLimit);
            assert_eq!(r.tips_ms, 0.0);
            assert_eq!(r.pow_ms, 0.0);
            assert!(r.total_ms > 0.0);
        }
        let summary = summarize(&scenario.name, &records).unwrap();
        assert_eq!((summary.accepted, summary.rejected), (5, 7));
        assert!((summary.acceptance_rate - 5.0 / 12.0).abs() < 1e-12);
    }

    #[test]
    fn short_window_slides_and_keeps_accepting() {
        let mut scenario = fixed_scenario(6, 3);
        scenario.messages = 12;
        // Every message takes at least ~100 ms, so a 1 ms window always
        // empties before the next arrival.
        scenario.provider.rate_limit = Some(RateLimit { max_messages: 1, window_ms: 1 });
        let records = run_scenario(&scenario);
        assert!(records.iter().all(|r| r.outcome == Outcome::Accepted));
    }

    #[test]
    fn pacing_delays_arrivals_but_not_latency() {
        let mut unpaced = fixed_scenario(6, 19);
        unpaced.client.bundle = Dist::Constant(10.0);
        unpaced.client.rtt = Dist::Constant(5.0);
        unpaced.provider.tips = Dist::Constant(5.0);
        let mut paced = unpaced.clone();
        paced.send_rate = Some(0.5); // one message every two seconds
        let a = run_scenario(&unpaced);
        let b = run_scenario(&paced);
        // Identical per-message records: pacing shifts start times only.
        assert_eq!(a, b);
    }

    #[test]
    fn full_availability_means_single_round_trip() {
        let mut scenario = fixed_scenario(6, 11);
        scenario.client.rtt = Dist::Constant(25.0);
        scenario.provider.availability = 1.0;
        for r in run_scenario(&scenario) {
            assert_eq!(r.net_ms, 25.0);
        }

        scenario.provider.availability = 0.5;
        let records = run_scenario(&scenario);
        // Retries only ever add whole round trips and never reject.
        assert!(records.iter().all(|r| r.outcome == Outcome::Accepted));
        assert!(records.iter().all(|r| (r.net_ms / 25.0).fract().abs() < 1e-9));
        assert!(records.iter().any(|r| r.net_ms > 25.0));
    }

    #[test]
    fn summary_stats_come_from_accepted_totals_only() {
        let records: Vec<LatencyRecord> = (1..=10)
            .map(|i| LatencyRecord {
                msg_index: i,
                bundle_ms: i as f64,
                tips_ms: 0.0,
                pow_ms: 0.0,
                net_ms: i as f64 * 9.0,
                total_ms: i as f64 * 10.0,
                outcome: if i <= 8 { Outcome::Accepted } else { Outcome::RejectedRateLimit },
            })
            .collect();
        let s = summarize("pins", &records).unwrap();
        assert_eq!((s.accepted, s.rejected), (8, 2));
        let stats = s.latency.unwrap();
        assert_eq!(stats.min_ms, 10.0);
        assert_eq!(stats.max_ms, 80.0);
        assert_eq!(stats.median_ms, 40.0);
        assert_eq!(stats.p95_ms, 80.0);
        assert!((stats.mean_ms - 45.0).abs() < 1e-9);
        assert!((stats.bundle_mean_ms - 4.5).abs() < 1e-9);
        assert!((stats.net_mean_ms - 40.5).abs() < 1e-9);
    }

    #[test]
    fn empty_input_and_all_rejected_boundaries() {
        assert_eq!(summarize("none", &[]), Err(SimError::EmptyInput));

        let rejected = vec![LatencyRecord {
            msg_index: 1,
            bundle_ms: 1.0,
            tips_ms: 0.0,
            pow_ms: 0.0,
            net_ms: 1.0,
            total_ms: 2.0,
            outcome: Outcome::RejectedRateLimit,
        }];
        let s = summarize("rejected", &rejected).unwrap();
        assert_eq!(s.acceptance_rate, 0.0);
        assert!(s.latency.is_none());
    }

    #[test]
    fn histogram_bins_accepted_latencies() {
        let scenario = fixed_scenario(8, 5);
        let records = run_scenario(&scenario);
        let hist = Histogram::from_records(&records, 50.0);
        let total: u64 = hist.counts.values().sum();
        assert_eq!(total, 30);
        let csv = hist.csv();
        assert!(csv.starts_with("bin_start_ms,count\n"));
    }
}
