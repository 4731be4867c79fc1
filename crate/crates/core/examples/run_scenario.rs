//! Runs a bundled scenario and prints per-sender statistics.
//!
//! `cargo run --release --example run_scenario -- [scenario.toml]`

use std::path::PathBuf;

use leosim::{run_scenario, ScenarioConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/simple_a.toml")));
    let cfg = ScenarioConfig::from_file(&path)?;
    let result = run_scenario(&cfg)?;
    println!("{}: {} snapshots, fingerprint {}", result.name, result.snapshot_count, result.fingerprint);
    for s in &result.senders {
        let m = &s.summary;
        println!(
            "  {} -> node {}: {} sent, {} received, loss {:.2}%, RTT {:.3}..{:.3} ms (mean {:.3}, mode {:.1} x{})",
            s.sender_id,
            s.destination,
            m.pings_transmitted,
            m.pings_received,
            m.ping_loss_pct,
            m.rtt_min_ms,
            m.rtt_max_ms,
            m.rtt_mean_ms,
            m.modal_bin.rtt_value_ms,
            m.modal_bin.frequency
        );
    }
    Ok(())
}
