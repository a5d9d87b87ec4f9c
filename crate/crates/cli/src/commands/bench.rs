// Copyright 2026 tangleshare contributors
// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::Path;

use tangleshare::simbench::{
    presets, records_csv, run_scenario, summarize, Histogram, Scenario, Summary,
};

use crate::commands::print_json;
use crate::error::{CliError, CliResult};

/// Bin width of the latency histograms written next to the record CSVs.
const HISTOGRAM_BIN_MS: f64 = 100.0;

pub fn list(json: bool) -> CliResult {
    let presets = presets::all();
    if json {
        let names: Vec<_> = presets
            .iter()
            .map(|(name, scenarios)| {
                serde_json::json!({
                    "preset": name,
                    "scenarios": scenarios.iter().map(|s| s.name.clone()).collect::<Vec<_>>(),
                })
            })
            .collect();
        print_json(&names)
    } else {
        for (name, scenarios) in presets {
            let names: Vec<_> = scenarios.iter().map(|s| s.name.as_str()).collect();
            println!("{name}: {}", names.join(", "));
        }
        Ok(())
    }
}

pub fn preset(name: &str, seed: Option<u64>, out: Option<&Path>, json: bool) -> CliResult {
    let mut scenarios = presets::all()
        .into_iter()
        .find(|(preset, _)| *preset == name)
        .map(|(_, scenarios)| scenarios)
        .ok_or_else(|| {
            let known: Vec<_> = presets::all().into_iter().map(|(n, _)| n).collect();
            CliError::Usage(format!("unknown preset {name:?}; known: {}", known.join(", ")))
        })?;
    if let Some(seed) = seed {
        for scenario in &mut scenarios {
            scenario.seed = seed;
        }
    }
    run(&scenarios, out, json)
}

pub fn file(path: &Path, out: Option<&Path>, json: bool) -> CliResult {
    let text = fs::read_to_string(path)?;
    let scenarios: Vec<Scenario> = match serde_json::from_str(&text) {
        Ok(list) => list,
        Err(_) => vec![serde_json::from_str(&text)
            .map_err(|e| CliError::Corrupt { file: path.display().to_string(), detail: e.to_string() })?],
    };
    run(&scenarios, out, json)
}

fn run(scenarios: &[Scenario], out: Option<&Path>, json: bool) -> CliResult {
    if scenarios.is_empty() {
        return Err(CliError::Usage("no scenarios to run".into()));
    }
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
    }
    let mut summaries = Vec::new();
    for scenario in scenarios {
        let records = run_scenario(scenario);
        if let Some(dir) = out {
            fs::write(dir.join(format!("{}.csv", scenario.name)), records_csv(&records))?;
            fs::write(
                dir.join(format!("{}-hist.csv", scenario.name)),
                Histogram::from_records(&records, HISTOGRAM_BIN_MS).csv(),
            )?;
        }
        summaries.push(summarize(&scenario.name, &records)?);
    }
    if json {
        return print_json(&summaries);
    }
    for summary in &summaries {
        print_summary(summary);
    }
    if let Some(dir) = out {
        println!("record and histogram CSVs written to {}", dir.display());
    }
    Ok(())
}

fn print_summary(s: &Summary) {
    println!("scenario {}", s.scenario);
    println!(
        "  sent {}, accepted {}, rejected {} (acceptance {:.1}%)",
        s.sent,
        s.accepted,
        s.rejected,
        s.acceptance_rate * 100.0
    );
    match &s.latency {
        Some(l) => {
            println!(
                "  total ms: mean {:.1}, median {:.1}, p95 {:.1}, min {:.1}, max {:.1}",
                l.mean_ms, l.median_ms, l.p95_ms, l.min_ms, l.max_ms
            );
            println!(
                "  phase means ms: bundle {:.1}, tips {:.1}, pow {:.1}, net {:.1}",
                l.bundle_mean_ms, l.tips_mean_ms, l.pow_mean_ms, l.net_mean_ms
            );
        }
        None => println!("  no accepted messages"),
    }
}
