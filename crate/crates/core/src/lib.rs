//! Deterministic discrete-event simulator for ground stations talking
//! through a LEO constellation: footprint geometry, Walker and TLE
//! constellations, per-interval shortest-path routing, ping traffic with a
//! bufferless collision model, and RTT/loss statistics.

pub mod cli;
pub mod engine;
pub mod geodesy;
pub mod ingest;
pub mod metrics;
pub mod orbits;
pub mod topology;
pub mod traffic;

use std::path::{Path, PathBuf};

pub use engine::{run_scenario, RunResult, ScenarioConfig};
pub use geodesy::{coverage_geometry, coverage_table, GeoPoint};
pub use metrics::MetricsSummary;
pub use orbits::{build_constellation, ConstellationSpec};

/// Any error the library reports.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Geodesy(#[from] geodesy::GeodesyError),
    #[error(transparent)]
    Orbit(#[from] orbits::OrbitError),
    #[error(transparent)]
    Tle(#[from] orbits::TleError),
    #[error(transparent)]
    Topology(#[from] topology::TopologyError),
    #[error(transparent)]
    Metrics(#[from] metrics::MetricsError),
    #[error(transparent)]
    Ingest(#[from] ingest::IngestError),
    #[error(transparent)]
    Engine(#[from] engine::EngineError),
    #[error("{}: {message}", path.display())]
    Io { path: PathBuf, message: String },
}

impl Error {
    pub fn io(path: impl AsRef<Path>, e: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().to_path_buf(),
            message: e.to_string(),
        }
    }
}
