//! Discrete-event loop. Topology updates fire at `k * update_interval`;
//! ping sends fire on each app's schedule. Events at equal times run
//! topology first, then by source node, app and sequence number, so every
//! run of a configuration is identical.

mod compare;
mod config;

pub use compare::{compare_runs, compare_summaries, Comparison, ComparisonRow, RunSummaries};
pub use config::{
    ConstellationConfig, GroundStationConfig, LinksConfig, PingAppEntry, ResolvedScenario, ScenarioConfig,
    StationRole,
};

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BinaryHeap};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use log::{debug, info};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::metrics::{self, MetricsSummary};
use crate::topology::{self, NodeId, TopologySnapshot};
use crate::traffic::{self, NodeChannels, PingOutcome, PingStatus};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("scenario parse error: {0}")]
    Parse(String),
    #[error("invalid scenario key {key}: {message}")]
    Config { key: String, message: String },
    #[error("{}: {message}", path.display())]
    Io { path: PathBuf, message: String },
    #[error("{0}")]
    Compare(String),
}

pub const OUTCOME_CSV_HEADER: &str = "sender_id,seq,send_time_s,status,rtt_ms,drop_node,path_len";

#[derive(Debug, Clone, Copy, PartialEq)]
enum EventKind {
    TopologyUpdate { index: usize },
    PingSend { source: NodeId, app: usize, seq: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Event {
    time_s: f64,
    kind: EventKind,
}

impl Event {
    fn key(&self) -> (u8, NodeId, usize, u64) {
        match self.kind {
            EventKind::TopologyUpdate { index } => (0, 0, index, 0),
            EventKind::PingSend { source, app, seq } => (1, source, app, seq),
        }
    }
}

impl Eq for Event {}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time_s.total_cmp(&other.time_s).then_with(|| self.key().cmp(&other.key()))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// `ceil(limit / interval)`, treating near-integral ratios as integral.
pub fn snapshot_count(sim_time_limit_s: f64, update_interval_s: f64) -> usize {
    let ratio = sim_time_limit_s / update_interval_s;
    let nearest = ratio.round();
    if (ratio - nearest).abs() < 1e-9 * nearest.max(1.0) {
        nearest as usize
    } else {
        ratio.ceil() as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SenderResult {
    pub sender_id: String,
    pub source: NodeId,
    pub destination: NodeId,
    pub outcomes: Vec<PingOutcome>,
    pub summary: MetricsSummary,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub name: String,
    pub senders: Vec<SenderResult>,
    pub snapshot_count: usize,
    pub config: ScenarioConfig,
    /// Outcome log CSV, rows in processing order.
    pub outcome_log: String,
    /// SHA-256 of `outcome_log`, hex.
    pub fingerprint: String,
    /// Event timestamps in the order they were processed.
    pub event_times_s: Vec<f64>,
}

/// Contents of `summary.json` in a run directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryFile {
    pub name: String,
    pub fingerprint: String,
    pub snapshot_count: usize,
    pub senders: BTreeMap<String, MetricsSummary>,
}

impl RunResult {
    pub fn sender(&self, sender_id: &str) -> Option<&SenderResult> {
        self.senders.iter().find(|s| s.sender_id == sender_id)
    }

    pub fn all_outcomes(&self) -> impl Iterator<Item = &PingOutcome> {
        self.senders.iter().flat_map(|s| &s.outcomes)
    }

    pub fn summaries(&self) -> BTreeMap<String, MetricsSummary> {
        self.senders
            .iter()
            .map(|s| (s.sender_id.clone(), s.summary.clone()))
            .collect()
    }

    pub fn summary_file(&self) -> SummaryFile {
        SummaryFile {
            name: self.name.clone(),
            fingerprint: self.fingerprint.clone(),
            snapshot_count: self.snapshot_count,
            senders: self.summaries(),
        }
    }

    /// Writes `outcomes.csv`, `summary.json`, `scenario.toml` and per-sender
    /// `rtt_vector_<id>.csv` / `histogram_<id>.csv` into `dir`.
    pub fn write_artifacts(&self, dir: &Path) -> Result<Vec<PathBuf>, EngineError> {
        let io = |path: &Path, e: std::io::Error| EngineError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        };
        std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        let mut files: Vec<(PathBuf, String)> = vec![
            (dir.join("outcomes.csv"), self.outcome_log.clone()),
            (
                dir.join("summary.json"),
                serde_json::to_string_pretty(&self.summary_file()).expect("summary serializes") + "\n",
            ),
            (dir.join("scenario.toml"), self.config.to_toml_string()),
        ];
        for s in &self.senders {
            let stem = file_stem(&s.sender_id);
            files.push((dir.join(format!("rtt_vector_{stem}.csv")), metrics::rtt_vector_csv(&s.outcomes)));
            let hist = metrics::rtt_histogram(&s.outcomes, self.config.histogram_bin_ms)
                .expect("bin width validated before the run");
            files.push((dir.join(format!("histogram_{stem}.csv")), hist.to_csv()));
        }
        for (path, body) in &files {
            std::fs::write(path, body).map_err(|e| io(path, e))?;
        }
        Ok(files.into_iter().map(|(p, _)| p).collect())
    }
}

/// Reads the `summary.json` of a run directory.
pub fn read_summary_file(dir: &Path) -> Result<SummaryFile, EngineError> {
    let path = dir.join("summary.json");
    let text = std::fs::read_to_string(&path).map_err(|e| EngineError::Io {
        path: path.clone(),
        message: e.to_string(),
    })?;
    serde_json::from_str(&text).map_err(|e| EngineError::Io {
        path,
        message: e.to_string(),
    })
}

fn file_stem(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

fn log_row(out: &mut String, sender: &str, o: &PingOutcome) {
    let (rtt, drop_node) = match o.status {
        PingStatus::Delivered { rtt_ms } => (format!("{rtt_ms:.6}"), String::new()),
        PingStatus::DroppedUnreachable => (String::new(), String::new()),
        PingStatus::DroppedCollision { node, .. } => (String::new(), node.to_string()),
    };
    let _ = writeln!(
        out,
        "{sender},{},{},{},{rtt},{drop_node},{}",
        o.seq,
        o.send_time_s,
        o.status.label(),
        o.path.len()
    );
}

struct AppState {
    sends: Vec<(f64, u64)>,
    next: usize,
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunResult, EngineError> {
    let scenario = cfg.resolve()?;
    let ResolvedScenario {
        satellites,
        ground,
        rules,
        apps,
        channel,
    } = &scenario;
    let count = snapshot_count(cfg.sim_time_limit_s, cfg.update_interval_s);
    info!(
        "scenario {:?}: {} satellites, {} ground stations, {} apps, {} snapshots",
        cfg.name,
        satellites.len(),
        ground.len(),
        apps.len(),
        count
    );

    let mut queue = BinaryHeap::new();
    for index in 0..count {
        queue.push(Reverse(Event {
            time_s: index as f64 * cfg.update_interval_s,
            kind: EventKind::TopologyUpdate { index },
        }));
    }
    let mut states: Vec<AppState> = apps
        .iter()
        .map(|(_, app)| AppState {
            sends: traffic::schedule_sends(app, cfg.sim_time_limit_s),
            next: 0,
        })
        .collect();
    let push_next = |queue: &mut BinaryHeap<Reverse<Event>>, states: &mut [AppState], app: usize| {
        let st = &mut states[app];
        if let Some(&(time_s, seq)) = st.sends.get(st.next) {
            st.next += 1;
            queue.push(Reverse(Event {
                time_s,
                kind: EventKind::PingSend {
                    source: apps[app].1.source,
                    app,
                    seq,
                },
            }));
        }
    };
    for app in 0..apps.len() {
        push_next(&mut queue, &mut states, app);
    }

    let node_count = ground.len() + satellites.len();
    let mut channels = NodeChannels::new(node_count);
    let mut snapshot: Option<TopologySnapshot> = None;
    let mut outcomes: Vec<Vec<PingOutcome>> = vec![Vec::new(); apps.len()];
    let mut log = String::from(OUTCOME_CSV_HEADER);
    log.push('\n');
    let mut event_times = Vec::new();

    while let Some(Reverse(event)) = queue.pop() {
        debug_assert!(event_times.last().is_none_or(|&t| t <= event.time_s));
        event_times.push(event.time_s);
        match event.kind {
            EventKind::TopologyUpdate { index } => {
                debug!("topology update {index} at {}s", event.time_s);
                channels.prune_before(event.time_s);
                snapshot = Some(topology::build_snapshot(
                    event.time_s,
                    satellites,
                    ground,
                    rules,
                    cfg.earth_phase_theta0_deg,
                ));
            }
            EventKind::PingSend { app, seq, .. } => {
                let snap = snapshot.as_ref().expect("a snapshot exists from t = 0");
                let (label, app_cfg) = &apps[app];
                let outcome = traffic::transmit(
                    app_cfg.source,
                    app_cfg.destination,
                    seq,
                    event.time_s,
                    snap,
                    &mut channels,
                    channel,
                );
                log_row(&mut log, label, &outcome);
                outcomes[app].push(outcome);
                push_next(&mut queue, &mut states, app);
            }
        }
    }

    let senders = apps
        .iter()
        .zip(outcomes)
        .map(|((label, app), outcomes)| {
            let summary = metrics::summarize(&outcomes, cfg.histogram_bin_ms).expect("bin width validated");
            SenderResult {
                sender_id: label.clone(),
                source: app.source,
                destination: app.destination,
                outcomes,
                summary,
            }
        })
        .collect();
    let fingerprint = hex::encode(Sha256::digest(log.as_bytes()));
    Ok(RunResult {
        name: cfg.name.clone(),
        senders,
        snapshot_count: count,
        config: cfg.clone(),
        outcome_log: log,
        fingerprint,
        event_times_s: event_times,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_SITES: &str = r#"
name = "unit"
sim_time_limit_s = 600
update_interval_s = 10

[constellation]
num_planes = 15
sats_per_plane = 10
altitude_km = 600

[links]
enable_intersatellite_links = false
min_elevation_deg = 25

[[ground_stations]]
name = "London"
latitude_deg = 51.5074
longitude_deg = -0.1278

[[ground_stations]]
name = "Valentia"
latitude_deg = 51.75
longitude_deg = -9.6582

[[ping_apps]]
source = "London"
destination = "Valentia"
send_interval_s = 0.5
"#;

    #[test]
    fn snapshot_count_formula() {
        assert_eq!(snapshot_count(1200.0, 10.0), 120);
        assert_eq!(snapshot_count(307.0, 10.0), 31);
        assert_eq!(snapshot_count(86_400.0, 60.0), 1440);
        assert_eq!(snapshot_count(0.3, 0.1), 3);
        assert_eq!(snapshot_count(5.0, 10.0), 1);
    }

    #[test]
    fn event_order() {
        let topo = Event {
            time_s: 10.0,
            kind: EventKind::TopologyUpdate { index: 1 },
        };
        let ping = |source, seq| Event {
            time_s: 10.0,
            kind: EventKind::PingSend { source, app: 0, seq },
        };
        assert!(topo < ping(0, 0));
        assert!(ping(0, 5) < ping(1, 0));
        assert!(ping(1, 0) < ping(1, 1));
        let early = Event {
            time_s: 9.5,
            kind: EventKind::PingSend { source: 9, app: 9, seq: 9 },
        };
        assert!(early < topo);
    }

    #[test]
    fn empty_app_list() {
        let text = TWO_SITES.split("[[ping_apps]]").next().unwrap();
        let r = run_scenario(&ScenarioConfig::from_toml_str(text).unwrap()).unwrap();
        assert!(r.senders.is_empty());
        assert_eq!(r.snapshot_count, 60);
        assert_eq!(r.outcome_log, format!("{OUTCOME_CSV_HEADER}\n"));
    }

    #[test]
    fn run_is_deterministic_and_ordered() {
        let cfg = ScenarioConfig::from_toml_str(TWO_SITES).unwrap();
        let a = run_scenario(&cfg).unwrap();
        let b = run_scenario(&cfg).unwrap();
        assert_eq!(a.outcome_log, b.outcome_log);
        assert_eq!(a.fingerprint, b.fingerprint);
        assert_eq!(a.fingerprint.len(), 64);
        assert!(a.event_times_s.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(a.event_times_s.len(), 60 + 1200);

        let s = &a.senders[0];
        assert_eq!(s.outcomes.len(), 1200);
        let seqs: Vec<u64> = s.outcomes.iter().map(|o| o.seq).collect();
        assert_eq!(seqs, (0..1200).collect::<Vec<_>>());
        assert_eq!(a.outcome_log.lines().count(), 1201);
        for o in &s.outcomes {
            if let Some(rtt) = o.status.rtt_ms() {
                assert!(rtt >= 8.005);
            }
        }
    }

    #[test]
    fn artifacts_round_trip() {
        let cfg = ScenarioConfig::from_toml_str(TWO_SITES).unwrap();
        let r = run_scenario(&cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let files = r.write_artifacts(dir.path()).unwrap();
        assert!(files.iter().any(|p| p.ends_with("rtt_vector_London.csv")));
        let back = read_summary_file(dir.path()).unwrap();
        assert_eq!(back, r.summary_file());
        let echoed = ScenarioConfig::from_file(&dir.path().join("scenario.toml")).unwrap();
        assert_eq!(echoed.sim_time_limit_s, 600.0);
    }
}
