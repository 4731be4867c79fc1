//! Bundled data and scenario files stay consistent with the code that
//! produces and reads them.

use std::path::{Path, PathBuf};

use leosim::engine::ScenarioConfig;
use leosim::ingest::{derive_schedules, parse_trace, read_schedule_csv};

fn root() -> &'static Path {
    Path::new(env!("CARGO_MANIFEST_DIR"))
}

fn scenario_files() -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(root().join("scenarios"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    v.sort();
    v
}

#[test]
fn bundled_schedule_matches_ingest_of_bundled_trace() {
    let trace = std::fs::read_to_string(root().join("data/santander_sample.csv")).unwrap();
    let derived = derive_schedules(&parse_trace(&trace).unwrap()).unwrap();
    let bundled = std::fs::read_to_string(root().join("data/santander_schedule.csv")).unwrap();
    assert_eq!(derived.to_csv(), bundled);
}

#[test]
fn trace_counts_per_sensor() {
    let trace = std::fs::read_to_string(root().join("data/santander_sample.csv")).unwrap();
    let schedule = read_schedule_csv(&derive_schedules(&parse_trace(&trace).unwrap()).unwrap().to_csv()).unwrap();
    let counts: Vec<(&str, usize)> = [
        ("1", 115),
        ("9", 266),
        ("19", 15),
        ("24", 270),
        ("53", 269),
        ("90", 128),
        ("110", 277),
        ("135", 102),
        ("146", 19),
        ("213", 13),
    ]
    .to_vec();
    for (id, n) in counts {
        assert_eq!(schedule[id].len(), n, "sensor {id}");
    }
}

#[test]
fn every_bundled_scenario_resolves() {
    let files = scenario_files();
    assert!(files.len() >= 16);
    for f in files {
        let cfg = ScenarioConfig::from_file(&f).unwrap_or_else(|e| panic!("{}: {e}", f.display()));
        let resolved = cfg.resolve().unwrap_or_else(|e| panic!("{}: {e}", f.display()));
        assert!(!resolved.apps.is_empty(), "{}", f.display());
        assert_eq!(cfg.name, f.file_stem().unwrap().to_str().unwrap());
    }
}

#[test]
fn scenario_round_trips_through_toml() {
    for f in scenario_files() {
        let cfg = ScenarioConfig::from_file(&f).unwrap();
        let again = ScenarioConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(cfg.name, again.name);
        assert_eq!(cfg.ground_stations, again.ground_stations);
        assert_eq!(cfg.ping_apps.len(), again.ping_apps.len());
        // File references become absolute; what they load must not change.
        assert_eq!(cfg.resolve().unwrap().apps, again.resolve().unwrap().apps, "{}", f.display());
    }
}
