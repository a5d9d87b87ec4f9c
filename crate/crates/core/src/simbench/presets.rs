// Copyright 2026 tangleshare contributors
// SPDX-License-Identifier: Apache-2.0

//! Calibrated client and provider profiles plus the scenario sets the
//! `bench` command ships with.
//!
//! The figures are calibration, not measurement: distribution parameters
//! were fitted so the shipped scenarios land on the latency targets the
//! profiles are named after (fast provider ≈ 9 s per mainnet message, slow
//! provider > 30 s, devnet well under a second).
//!
//! Paired scenarios (same provider, two clients) deliberately share one
//! seed: the random streams stay aligned draw-for-draw, so the reported gap
//! between the two clients is exactly the profile difference rather than
//! sampling noise.

use crate::ledger::NetworkConfig;

use super::{ClientProfile, Dist, NodeProfile, RateLimit, Scenario};

/// Well-provisioned development-network node: fast tip selection, hardware
/// good for ten thousand hash attempts per second, always reachable.
pub fn devnet_node() -> NodeProfile {
    NodeProfile {
        name: "devnet-node".into(),
        tips: Dist::LogNormal { mean_ms: 33.0, sigma: 0.3 },
        pow_rate: 10_000.0,
        availability: 1.0,
        rate_limit: None,
    }
}

/// Slow public mainnet node: long tip-selection queues, modest
/// proof-of-work throughput, frequently unreachable.
pub fn provider1() -> NodeProfile {
    NodeProfile {
        name: "provider1".into(),
        tips: Dist::LogNormal { mean_ms: 9_000.0, sigma: 0.4 },
        pow_rate: 500.0,
        availability: 0.9,
        rate_limit: None,
    }
}

/// Faster public mainnet node that enforces a submission cap of thirty
/// messages per hour per client.
pub fn provider2() -> NodeProfile {
    NodeProfile {
        name: "provider2".into(),
        tips: Dist::LogNormal { mean_ms: 300.0, sigma: 0.3 },
        pow_rate: 1_900.0,
        availability: 0.95,
        rate_limit: Some(RateLimit { max_messages: 30, window_ms: 3_600_000 }),
    }
}

/// Constrained client close to the node: heavy local bundle preparation,
/// short network path.
pub fn client_au() -> ClientProfile {
    ClientProfile {
        name: "au".into(),
        bundle: Dist::LogNormal { mean_ms: 1_475.0, sigma: 0.05 },
        rtt: Dist::LogNormal { mean_ms: 16.0, sigma: 0.2 },
    }
}

/// Fast client far from the node: cheap bundle preparation, long network
/// path.
pub fn client_pc() -> ClientProfile {
    ClientProfile {
        name: "pc".into(),
        bundle: Dist::LogNormal { mean_ms: 224.0, sigma: 0.05 },
        rtt: Dist::LogNormal { mean_ms: 128.0, sigma: 0.2 },
    }
}

pub fn scenario(
    name: &str,
    client: ClientProfile,
    provider: NodeProfile,
    network: NetworkConfig,
    messages: u32,
    seed: u64,
) -> Scenario {
    Scenario { name: name.into(), seed, messages, send_rate: None, client, provider, network }
}

/// Same far client against both public mainnet providers.
pub fn provider_comparison() -> Vec<Scenario> {
    vec![
        scenario("pc-provider1", client_pc(), provider1(), NetworkConfig::mainnet(), 30, 0x70C0),
        scenario("pc-provider2", client_pc(), provider2(), NetworkConfig::mainnet(), 30, 0x70C0),
    ]
}

/// Both clients against the development network, sharing a seed so the gap
/// is purely the client profiles.
pub fn devnet_au_pc() -> Vec<Scenario> {
    vec![
        scenario("au-devnet", client_au(), devnet_node(), NetworkConfig::devnet(), 30, 0xDE27),
        scenario("pc-devnet", client_pc(), devnet_node(), NetworkConfig::devnet(), 30, 0xDE27),
    ]
}

/// Both clients against the slow mainnet provider, sharing a seed; the long
/// proof-of-work term dominates and the clients land within a few percent
/// of each other.
pub fn mainnet_au_pc() -> Vec<Scenario> {
    vec![
        scenario("au-mainnet", client_au(), provider1(), NetworkConfig::mainnet(), 30, 0x3A1A),
        scenario("pc-mainnet", client_pc(), provider1(), NetworkConfig::mainnet(), 30, 0x3A1A),
    ]
}

/// A hundred messages paced at 0.4 per second into the capped provider:
/// enough sustained traffic to trip its sliding-window limit.
pub fn rate_limit_demo() -> Scenario {
    let mut s = scenario(
        "pc-provider2-rate-limit",
        client_pc(),
        provider2(),
        NetworkConfig::mainnet(),
        100,
        0x11E7,
    );
    s.send_rate = Some(0.4);
    s
}

/// Every shipped preset, keyed by the name the command line accepts.
pub fn all() -> Vec<(&'static str, Vec<Scenario>)> {
    vec![
        ("provider-comparison", provider_comparison()),
        ("devnet-au-pc", devnet_au_pc()),
        ("mainnet-au-pc", mainnet_au_pc()),
        ("rate-limit", vec![rate_limit_demo()]),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simbench::{run_scenario, summarize, Outcome};

    fn mean_of(scenarios: &[Scenario], name: &str) -> f64 {
        let s = scenarios.iter().find(|s| s.name == name).expect("scenario exists");
        summarize(&s.name, &run_scenario(s)).unwrap().latency.expect("accepted messages").mean_ms
    }

    #[test]
    fn devnet_means_sit_in_their_calibrated_bands() {
        let set = devnet_au_pc();
        let pc = mean_of(&set, "pc-devnet");
        let au = mean_of(&set, "au-devnet");
        assert!((350.0..=550.0).contains(&pc), "pc-devnet mean {pc}");
        assert!((1050.0..=1600.0).contains(&au), "au-devnet mean {au}");
        assert!(au > pc);
    }

    #[test]
    fn provider_means_split_as_calibrated() {
        let set = provider_comparison();
        let fast = mean_of(&set, "pc-provider2");
        let slow = mean_of(&set, "pc-provider1");
        assert!((7_000.0..=11_000.0).contains(&fast), "pc-provider2 mean {fast}");
        assert!(slow > 30_000.0, "pc-provider1 mean {slow}");
    }

    #[test]
    fn mainnet_clients_land_within_ten_percent() {
        let set = mainnet_au_pc();
        let au = mean_of(&set, "au-mainnet");
        let pc = mean_of(&set, "pc-mainnet");
        let gap = (au - pc).abs() / pc.max(au);
        assert!(gap < 0.10, "au {au} vs pc {pc}: gap {gap}");
    }

    #[test]
    fn same_client_pays_more_on_the_harder_network() {
        // Same provider hardware and seed; only the difficulty moves.
        let devnet = scenario("d", client_pc(), devnet_node(), NetworkConfig::devnet(), 30, 9);
        let mainnet = scenario("m", client_pc(), devnet_node(), NetworkConfig::mainnet(), 30, 9);
        let d = mean_of(&[devnet], "d");
        let m = mean_of(&[mainnet], "m");
        assert!(m > d, "mainnet mean {m} vs devnet mean {d}");
    }

    #[test]
    fn rate_limit_first_rejection_is_message_31() {
        let records = run_scenario(&rate_limit_demo());
        assert_eq!(records.len(), 100);
        let first = records
            .iter()
            .find(|r| r.outcome == Outcome::RejectedRateLimit)
            .expect("cap must trip");
        assert_eq!(first.msg_index, 31);
        assert!(records[..30].iter().all(|r| r.outcome == Outcome::Accepted));
    }

    #[test]
    fn presets_expose_stable_names() {
        let names: Vec<&str> = all().iter().map(|(n, _)| *n).collect();
        assert_eq!(
            names,
            ["provider-comparison", "devnet-au-pc", "mainnet-au-pc", "rate-limit"]
        );
        for (_, scenarios) in all() {
            assert!(!scenarios.is_empty());
        }
    }
}
