//! Reads the bundled sensor trace and derives per-sensor ping schedules
//! relative to the earliest report.

use std::collections::BTreeMap;

use leosim::ingest::{derive_schedules, interval_gcd_s, interval_histogram, parse_trace};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/santander_sample.csv").to_string());
    let traces = parse_trace(&std::fs::read_to_string(&path)?)?;
    let derived = derive_schedules(&traces)?;
    println!("t0 = {} (epoch s), interval GCD = {} s", derived.t0_epoch_s, interval_gcd_s(&traces)?);
    for (trace, sched) in traces.iter().zip(&derived.schedules) {
        let mut gaps: BTreeMap<i64, usize> = BTreeMap::new();
        for (_, delta) in interval_histogram(trace)? {
            *gaps.entry(delta).or_default() += 1;
        }
        let intervals: Vec<String> = gaps.iter().map(|(gap, n)| format!("{}min x{}", gap / 60, n)).collect();
        println!(
            "  sensor {:>3} {:?}: {} reports, first at +{} min, gaps {}",
            sched.sensor_id,
            trace.kind,
            sched.times_s.len(),
            sched.start_offset_s / 60,
            intervals.join(" ")
        );
    }
    Ok(())
}
