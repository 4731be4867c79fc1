//! Sensor trace ingestion: CSV traces become explicit ping schedules.
//!
//! Input columns: `sensor_id,urn,latitude,longitude,timestamp,type,value`.
//! Timestamps are ISO-8601 (offset or naive UTC) or epoch seconds and are
//! rounded to whole seconds on read.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use chrono::{DateTime, NaiveDateTime};
use log::warn;
use serde::Serialize;
use thiserror::Error;

use crate::geodesy::GeoPoint;

pub const TRACE_HEADER: [&str; 7] = ["sensor_id", "urn", "latitude", "longitude", "timestamp", "type", "value"];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IngestError {
    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error("missing column {0:?} in header")]
    MissingColumn(&'static str),
    #[error("trace contains no rows")]
    Empty,
    #[error("sensor {sensor_id} has {count} timestamp(s); intervals need at least 2")]
    Degenerate { sensor_id: String, count: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SensorKind {
    /// `:np` parking-slot presence detector.
    StableParking,
    /// `:t` fixed environmental sensor.
    StableMeasure,
    /// `:ar` vehicle- or phone-mounted sensor.
    Mobile,
}

impl SensorKind {
    /// Reads the kind from the last urn segment, e.g. `...:np3870` or
    /// `...:t258`. Unknown tokens fall back to `StableMeasure`.
    pub fn from_urn(urn: &str) -> Self {
        let segment = urn.rsplit(':').next().unwrap_or("");
        let token = segment.trim_end_matches(|c: char| c.is_ascii_digit());
        match token {
            "np" => SensorKind::StableParking,
            "t" => SensorKind::StableMeasure,
            "ar" => SensorKind::Mobile,
            _ => {
                warn!("urn {urn:?}: unknown sensor kind {token:?}, treating as stable measure");
                SensorKind::StableMeasure
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensorTrace {
    pub sensor_id: String,
    pub urn: String,
    /// First reported position; mobile sensors are frozen here.
    pub location: GeoPoint,
    pub kind: SensorKind,
    pub category: String,
    /// Epoch seconds, strictly increasing.
    pub timestamps_s: Vec<i64>,
    /// Raw values, parallel to `timestamps_s`.
    pub values: Vec<String>,
}

pub fn parse_timestamp(text: &str) -> Option<i64> {
    let text = text.trim();
    if let Ok(secs) = text.parse::<f64>() {
        return secs.is_finite().then(|| secs.round() as i64);
    }
    let round = |secs: i64, nanos: u32| secs + i64::from(nanos >= 500_000_000);
    if let Ok(dt) = DateTime::parse_from_rfc3339(text) {
        return Some(round(dt.timestamp(), dt.timestamp_subsec_nanos()));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(text, fmt) {
            let dt = dt.and_utc();
            return Some(round(dt.timestamp(), dt.timestamp_subsec_nanos()));
        }
    }
    None
}

/// Groups rows by sensor. Traces come back ordered by sensor id, numeric
/// ids numerically.
pub fn parse_trace(content: &str) -> Result<Vec<SensorTrace>, IngestError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(content.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| IngestError::Malformed {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let mut col = [0usize; 7];
    for (slot, name) in col.iter_mut().zip(TRACE_HEADER) {
        *slot = headers.iter().position(|h| h == name).ok_or(IngestError::MissingColumn(name))?;
    }

    let mut rows: BTreeMap<String, (SensorTrace, Vec<(i64, String)>)> = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| IngestError::Malformed {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| record.get(col[i]).unwrap_or("");
        let bad = |message: String| IngestError::Malformed { line, message };

        let sensor_id = field(0).to_string();
        if sensor_id.is_empty() {
            return Err(bad("empty sensor_id".into()));
        }
        let lat: f64 = field(2).parse().map_err(|_| bad(format!("latitude {:?} is not a number", field(2))))?;
        let lon: f64 = field(3).parse().map_err(|_| bad(format!("longitude {:?} is not a number", field(3))))?;
        let location = GeoPoint::surface(lat, lon).map_err(|e| bad(e.to_string()))?;
        let ts = parse_timestamp(field(4)).ok_or_else(|| bad(format!("unparseable timestamp {:?}", field(4))))?;

        let entry = rows.entry(sensor_id.clone()).or_insert_with(|| {
            let urn = field(1).to_string();
            (
                SensorTrace {
                    kind: SensorKind::from_urn(&urn),
                    sensor_id,
                    urn,
                    location,
                    category: field(5).to_string(),
                    timestamps_s: Vec::new(),
                    values: Vec::new(),
                },
                Vec::new(),
            )
        });
        entry.1.push((ts, field(6).to_string()));
    }
    if rows.is_empty() {
        return Err(IngestError::Empty);
    }

    let mut traces: Vec<SensorTrace> = rows
        .into_values()
        .map(|(mut trace, mut samples)| {
            samples.sort_by_key(|s| s.0);
            let before = samples.len();
            samples.dedup_by_key(|s| s.0);
            if samples.len() < before {
                warn!(
                    "sensor {}: dropped {} duplicate timestamp row(s)",
                    trace.sensor_id,
                    before - samples.len()
                );
            }
            (trace.timestamps_s, trace.values) = samples.into_iter().unzip();
            trace
        })
        .collect();
    traces.sort_by(|a, b| sensor_order(&a.sensor_id, &b.sensor_id));
    Ok(traces)
}

fn sensor_order(a: &str, b: &str) -> std::cmp::Ordering {
    let num = |s: &str| s.trim_start_matches(|c: char| !c.is_ascii_digit()).parse::<u64>().ok();
    match (num(a), num(b)) {
        (Some(x), Some(y)) => x.cmp(&y).then_with(|| a.cmp(b)),
        _ => a.cmp(b),
    }
}

/// Writes traces back in input format with epoch-second timestamps.
pub fn traces_to_csv(traces: &[SensorTrace]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TRACE_HEADER).expect("in-memory write");
    for t in traces {
        for (ts, value) in t.timestamps_s.iter().zip(&t.values) {
            w.write_record([
                t.sensor_id.as_str(),
                t.urn.as_str(),
                &t.location.latitude_deg.to_string(),
                &t.location.longitude_deg.to_string(),
                &ts.to_string(),
                t.category.as_str(),
                value.as_str(),
            ])
            .expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensorSchedule {
    pub sensor_id: String,
    pub start_offset_s: i64,
    /// Seconds after the shared reference, ascending.
    pub times_s: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivedSchedules {
    /// Earliest timestamp across all traces, epoch seconds.
    pub t0_epoch_s: i64,
    pub schedules: Vec<SensorSchedule>,
}

impl DerivedSchedules {
    pub fn get(&self, sensor_id: &str) -> Option<&SensorSchedule> {
        self.schedules.iter().find(|s| s.sensor_id == sensor_id)
    }

    /// `sensor_id,relative_time_s` rows, readable by [`read_schedule_csv`].
    pub fn to_csv(&self) -> String {
        let mut out = String::from("sensor_id,relative_time_s\n");
        for s in &self.schedules {
            for t in &s.times_s {
                let _ = writeln!(out, "{},{t}", s.sensor_id);
            }
        }
        out
    }
}

pub fn derive_schedules(traces: &[SensorTrace]) -> Result<DerivedSchedules, IngestError> {
    let t0 = traces
        .iter()
        .filter_map(|t| t.timestamps_s.first())
        .min()
        .copied()
        .ok_or(IngestError::Empty)?;
    let schedules = traces
        .iter()
        .map(|t| {
            let times_s: Vec<i64> = t.timestamps_s.iter().map(|ts| ts - t0).collect();
            SensorSchedule {
                sensor_id: t.sensor_id.clone(),
                start_offset_s: times_s.first().copied().unwrap_or(0),
                times_s,
            }
        })
        .collect();
    Ok(DerivedSchedules {
        t0_epoch_s: t0,
        schedules,
    })
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn require_intervals(trace: &SensorTrace) -> Result<(), IngestError> {
    if trace.timestamps_s.len() < 2 {
        return Err(IngestError::Degenerate {
            sensor_id: trace.sensor_id.clone(),
            count: trace.timestamps_s.len(),
        });
    }
    Ok(())
}

/// GCD of every successive interval of every trace, the coarsest update
/// interval that still lands on every send time.
pub fn interval_gcd_s(traces: &[SensorTrace]) -> Result<u64, IngestError> {
    if traces.is_empty() {
        return Err(IngestError::Empty);
    }
    let mut g = 0;
    for t in traces {
        require_intervals(t)?;
        for w in t.timestamps_s.windows(2) {
            g = gcd(g, (w[1] - w[0]) as u64);
        }
    }
    Ok(g)
}

/// `(time_s, delta_to_next_s)` for each timestamp that has a successor.
pub fn interval_histogram(trace: &SensorTrace) -> Result<Vec<(i64, i64)>, IngestError> {
    require_intervals(trace)?;
    Ok(trace.timestamps_s.windows(2).map(|w| (w[0], w[1] - w[0])).collect())
}

/// Per-sensor interval series relative to `t0_epoch_s`.
pub fn interval_histogram_csv(traces: &[SensorTrace], t0_epoch_s: i64) -> Result<String, IngestError> {
    let mut out = String::from("sensor_id,time_s,delta_s\n");
    for t in traces {
        for (time, delta) in interval_histogram(t)? {
            let _ = writeln!(out, "{},{},{delta}", t.sensor_id, time - t0_epoch_s);
        }
    }
    Ok(out)
}

/// Reads a `sensor_id,relative_time_s` schedule file.
pub fn read_schedule_csv(content: &str) -> Result<BTreeMap<String, Vec<f64>>, IngestError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(content.as_bytes());
    let mut out: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| IngestError::Malformed {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let (Some(id), Some(t)) = (record.get(0), record.get(1)) else {
            return Err(IngestError::Malformed {
                line,
                message: "expected sensor_id,relative_time_s".into(),
            });
        };
        let t: f64 = t.parse().map_err(|_| IngestError::Malformed {
            line,
            message: format!("time {t:?} is not a number"),
        })?;
        out.entry(id.to_string()).or_default().push(t);
    }
    for times in out.values_mut() {
        times.sort_by(f64::total_cmp);
    }
    Ok(out)
}
