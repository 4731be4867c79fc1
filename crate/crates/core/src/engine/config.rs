//! Scenario files (TOML). Unknown keys are rejected and every problem is
//! reported against the key that caused it, before the run starts.

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::geodesy::GeoPoint;
use crate::ingest;
use crate::metrics::DEFAULT_BIN_MS;
use crate::orbits::{self, ConstellationSpec, Satellite};
use crate::topology::{IslMode, LinkRules};
use crate::traffic::{ChannelParams, PingAppConfig};

use super::EngineError;

fn default_tx_duration() -> f64 {
    ChannelParams::default().tx_duration_s
}

fn default_bin() -> f64 {
    DEFAULT_BIN_MS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: String,
    pub sim_time_limit_s: f64,
    pub update_interval_s: f64,
    #[serde(default = "default_tx_duration")]
    pub tx_duration_s: f64,
    #[serde(default)]
    pub processing_delay_s: f64,
    #[serde(default = "default_bin")]
    pub histogram_bin_ms: f64,
    #[serde(default)]
    pub earth_phase_theta0_deg: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constellation: Option<ConstellationConfig>,
    /// Alternative to `[constellation]`: satellites from a TLE file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tle_file: Option<PathBuf>,
    pub links: LinksConfig,
    #[serde(default)]
    pub ground_stations: Vec<GroundStationConfig>,
    #[serde(default)]
    pub ping_apps: Vec<PingAppEntry>,
    /// Directory that relative file references resolve against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstellationConfig {
    pub num_planes: u32,
    pub sats_per_plane: u32,
    pub altitude_km: f64,
    #[serde(default = "default_inclination")]
    pub inclination_deg: f64,
    #[serde(default = "default_spread")]
    pub raan_spread_deg: f64,
    #[serde(default)]
    pub phase_factor: u32,
}

fn default_inclination() -> f64 {
    ConstellationSpec::DEFAULT_INCLINATION_DEG
}

fn default_spread() -> f64 {
    ConstellationSpec::DEFAULT_RAAN_SPREAD_DEG
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinksConfig {
    pub enable_intersatellite_links: bool,
    pub min_elevation_deg: f64,
    #[serde(default)]
    pub isl_mode: IslMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_isl_range_km: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StationRole {
    Sender,
    Receiver,
    #[default]
    Relay,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundStationConfig {
    pub name: String,
    pub latitude_deg: f64,
    pub longitude_deg: f64,
    #[serde(default)]
    pub altitude_m: f64,
    #[serde(default)]
    pub role: StationRole,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PingAppEntry {
    /// Sender label in outputs; defaults to the source station name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub source: String,
    pub destination: String,
    #[serde(default)]
    pub start_time_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub send_interval_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    /// Explicit send times, seconds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Vec<f64>>,
    /// `sensor_id,relative_time_s` file; needs `sensor_id`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule_file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sensor_id: Option<String>,
}

impl PingAppEntry {
    pub fn label(&self) -> &str {
        self.name.as_deref().unwrap_or(&self.source)
    }
}

/// A validated scenario with every file reference loaded.
#[derive(Debug, Clone)]
pub struct ResolvedScenario {
    pub satellites: Vec<Satellite>,
    pub ground: Vec<GeoPoint>,
    pub rules: LinkRules,
    pub apps: Vec<(String, PingAppConfig)>,
    pub channel: ChannelParams,
}

fn invalid(key: impl Into<String>, message: impl Into<String>) -> EngineError {
    EngineError::Config {
        key: key.into(),
        message: message.into(),
    }
}

fn positive(key: &str, v: f64) -> Result<(), EngineError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(key, format!("must be > 0, got {v}")))
    }
}

fn non_negative(key: &str, v: f64) -> Result<(), EngineError> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(invalid(key, format!("must be >= 0, got {v}")))
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, EngineError> {
        toml::from_str(text).map_err(|e| EngineError::Parse(e.message().to_string() + &span_hint(text, e.span())))
    }

    pub fn from_file(path: &Path) -> Result<Self, EngineError> {
        let text = std::fs::read_to_string(path).map_err(|e| EngineError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let mut cfg = Self::from_toml_str(&text).map_err(|e| match e {
            EngineError::Parse(m) => EngineError::Parse(format!("{}: {m}", path.display())),
            other => other,
        })?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        if cfg.name.is_empty() {
            cfg.name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        }
        Ok(cfg)
    }

    /// File references are written as absolute paths so the output can be
    /// rerun from any directory.
    pub fn to_toml_string(&self) -> String {
        let mut out = self.clone();
        let absolute = |p: &Path| {
            let p = self.resolve_path(p);
            std::path::absolute(&p).unwrap_or(p)
        };
        out.tle_file = self.tle_file.as_deref().map(absolute);
        for app in &mut out.ping_apps {
            app.schedule_file = app.schedule_file.as_deref().map(absolute);
        }
        toml::to_string(&out).expect("scenario config serializes")
    }

    fn resolve_path(&self, p: &Path) -> PathBuf {
        match &self.base_dir {
            Some(base) if p.is_relative() => base.join(p),
            _ => p.to_path_buf(),
        }
    }

    fn read(&self, key: &str, p: &Path) -> Result<String, EngineError> {
        let path = self.resolve_path(p);
        std::fs::read_to_string(&path).map_err(|e| invalid(key, format!("cannot read {}: {e}", path.display())))
    }

    pub fn channel_params(&self) -> ChannelParams {
        ChannelParams {
            tx_duration_s: self.tx_duration_s,
            processing_delay_s: self.processing_delay_s,
        }
    }

    pub fn link_rules(&self) -> LinkRules {
        LinkRules {
            enable_intersatellite_links: self.links.enable_intersatellite_links,
            min_elevation_deg: self.links.min_elevation_deg,
            isl_mode: self.links.isl_mode,
            max_isl_range_km: self.links.max_isl_range_km,
        }
    }

    /// Checks every key and loads the referenced files.
    pub fn resolve(&self) -> Result<ResolvedScenario, EngineError> {
        positive("sim_time_limit_s", self.sim_time_limit_s)?;
        positive("update_interval_s", self.update_interval_s)?;
        non_negative("tx_duration_s", self.tx_duration_s)?;
        non_negative("processing_delay_s", self.processing_delay_s)?;
        positive("histogram_bin_ms", self.histogram_bin_ms)?;
        if !self.earth_phase_theta0_deg.is_finite() {
            return Err(invalid("earth_phase_theta0_deg", "must be finite"));
        }
        if !(0.0..=90.0).contains(&self.links.min_elevation_deg) {
            return Err(invalid(
                "links.min_elevation_deg",
                format!("must lie in [0, 90], got {}", self.links.min_elevation_deg),
            ));
        }
        if let Some(r) = self.links.max_isl_range_km {
            positive("links.max_isl_range_km", r)?;
        }

        let satellites = match (&self.constellation, &self.tle_file) {
            (Some(_), Some(_)) => return Err(invalid("tle_file", "give either [constellation] or tle_file, not both")),
            (None, None) => return Err(invalid("constellation", "missing: give [constellation] or tle_file")),
            (Some(c), None) => {
                let spec = ConstellationSpec {
                    num_planes: c.num_planes,
                    sats_per_plane: c.sats_per_plane,
                    altitude_km: c.altitude_km,
                    inclination_deg: c.inclination_deg,
                    raan_spread_deg: c.raan_spread_deg,
                    phase_factor: c.phase_factor,
                    min_elevation_deg: self.links.min_elevation_deg,
                };
                orbits::build_constellation(&spec).map_err(|e| invalid("constellation", e.to_string()))?
            }
            (None, Some(p)) => {
                let text = self.read("tle_file", p)?;
                let records = orbits::parse_tle_file(&text).map_err(|e| invalid("tle_file", e.to_string()))?;
                orbits::satellites_from_tles(&records).map_err(|e| invalid("tle_file", e.to_string()))?
            }
        };
        for s in &satellites {
            orbits::propagate(&s.elements, 0.0).map_err(|e| invalid("tle_file", format!("{}: {e}", s.name)))?;
        }

        let mut index = BTreeMap::new();
        let mut ground = Vec::with_capacity(self.ground_stations.len());
        for (i, gs) in self.ground_stations.iter().enumerate() {
            let key = format!("ground_stations[{i}]");
            if index.insert(gs.name.as_str(), i).is_some() {
                return Err(invalid(format!("{key}.name"), format!("duplicate station name {:?}", gs.name)));
            }
            ground.push(
                GeoPoint::new(gs.latitude_deg, gs.longitude_deg, gs.altitude_m)
                    .map_err(|e| invalid(key, e.to_string()))?,
            );
        }

        let mut labels = HashSet::new();
        let mut schedule_files: BTreeMap<PathBuf, BTreeMap<String, Vec<f64>>> = BTreeMap::new();
        let mut apps = Vec::with_capacity(self.ping_apps.len());
        for (i, app) in self.ping_apps.iter().enumerate() {
            let key = format!("ping_apps[{i}]");
            let station = |field: &str, name: &str| {
                index
                    .get(name)
                    .copied()
                    .ok_or_else(|| invalid(format!("{key}.{field}"), format!("unknown ground station {name:?}")))
            };
            let source = station("source", &app.source)?;
            let destination = station("destination", &app.destination)?;
            if source == destination {
                return Err(invalid(format!("{key}.destination"), "must differ from source"));
            }
            if !labels.insert(app.label().to_string()) {
                return Err(invalid(
                    format!("{key}.name"),
                    format!("sender label {:?} is used twice; set a distinct name", app.label()),
                ));
            }
            non_negative(&format!("{key}.start_time_s"), app.start_time_s)?;

            let explicit = match (&app.schedule, &app.schedule_file) {
                (Some(_), Some(_)) => {
                    return Err(invalid(format!("{key}.schedule_file"), "give either schedule or schedule_file"))
                }
                (Some(times), None) => Some(times.clone()),
                (None, Some(p)) => {
                    let sensor = app
                        .sensor_id
                        .as_ref()
                        .ok_or_else(|| invalid(format!("{key}.sensor_id"), "required with schedule_file"))?;
                    let path = self.resolve_path(p);
                    if !schedule_files.contains_key(&path) {
                        let text = self.read(&format!("{key}.schedule_file"), p)?;
                        let parsed = ingest::read_schedule_csv(&text)
                            .map_err(|e| invalid(format!("{key}.schedule_file"), e.to_string()))?;
                        schedule_files.insert(path.clone(), parsed);
                    }
                    let times = schedule_files[&path].get(sensor).cloned().ok_or_else(|| {
                        invalid(format!("{key}.sensor_id"), format!("sensor {sensor:?} not in {}", path.display()))
                    })?;
                    Some(times)
                }
                (None, None) => None,
            };
            let mut cfg = match (explicit, app.send_interval_s) {
                (Some(_), Some(_)) => {
                    return Err(invalid(
                        format!("{key}.send_interval_s"),
                        "not allowed together with an explicit schedule",
                    ))
                }
                (Some(times), None) => {
                    if let Some(t) = times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
                        return Err(invalid(format!("{key}.schedule"), format!("send time {t} must be >= 0")));
                    }
                    PingAppConfig::scheduled(source, destination, times)
                }
                (None, Some(interval)) => {
                    positive(&format!("{key}.send_interval_s"), interval)?;
                    PingAppConfig::periodic(source, destination, app.start_time_s, interval)
                }
                (None, None) => {
                    return Err(invalid(
                        format!("{key}.send_interval_s"),
                        "missing: give send_interval_s, schedule or schedule_file",
                    ))
                }
            };
            cfg.count = app.count;
            apps.push((app.label().to_string(), cfg));
        }

        Ok(ResolvedScenario {
            satellites,
            ground,
            rules: self.link_rules(),
            apps,
            channel: self.channel_params(),
        })
    }
}

fn span_hint(text: &str, span: Option<std::ops::Range<usize>>) -> String {
    match span {
        Some(r) => {
            let line = text[..r.start.min(text.len())].matches('\n').count() + 1;
            format!(" (line {line})")
        }
        None => String::new(),
    }
}
