//! Side-by-side per-sender statistics for several runs, with deltas
//! against the first run.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use log::warn;

use crate::metrics::MetricsSummary;

use super::{EngineError, RunResult, SummaryFile};

/// One run's per-sender summaries under a display label.
pub type RunSummaries = (String, std::collections::BTreeMap<String, MetricsSummary>);

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub sender_id: String,
    /// One cell per run, `None` where the run has no such sender.
    pub cells: Vec<Option<MetricsSummary>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub labels: Vec<String>,
    pub rows: Vec<ComparisonRow>,
    pub warnings: Vec<String>,
}

const COLUMNS: [&str; 14] = [
    "sender_id",
    "run",
    "pings_tx",
    "pings_rx",
    "rtt_min_ms",
    "rtt_max_ms",
    "rtt_range_ms",
    "rtt_mean_ms",
    "loss_pct",
    "modal_ms",
    "modal_freq",
    "delta_mean_ms",
    "delta_range_ms",
    "delta_loss_pct",
];

pub fn compare_summaries(runs: &[RunSummaries]) -> Result<Comparison, EngineError> {
    if runs.len() < 2 {
        return Err(EngineError::Compare(format!("need at least 2 runs to compare, got {}", runs.len())));
    }
    let all: BTreeSet<&String> = runs.iter().flat_map(|(_, m)| m.keys()).collect();
    let mut warnings = Vec::new();
    for (label, m) in runs {
        let missing: Vec<&str> = all.iter().filter(|s| !m.contains_key(**s)).map(|s| s.as_str()).collect();
        if !missing.is_empty() {
            let w = format!("run {label:?} has no sender(s) {}", missing.join(", "));
            warn!("{w}");
            warnings.push(w);
        }
    }
    let rows = all
        .into_iter()
        .map(|sender| ComparisonRow {
            sender_id: sender.clone(),
            cells: runs.iter().map(|(_, m)| m.get(sender).cloned()).collect(),
        })
        .collect();
    Ok(Comparison {
        labels: runs.iter().map(|(l, _)| l.clone()).collect(),
        rows,
        warnings,
    })
}

pub fn compare_runs(results: &[RunResult]) -> Result<Comparison, EngineError> {
    let runs: Vec<RunSummaries> = results.iter().map(|r| (r.name.clone(), r.summaries())).collect();
    compare_summaries(&runs)
}

impl SummaryFile {
    pub fn run_summaries(&self, label: impl Into<String>) -> RunSummaries {
        (label.into(), self.senders.clone())
    }
}

fn fmt(v: f64) -> String {
    format!("{v:.3}")
}

impl Comparison {
    fn records(&self) -> Vec<[String; 14]> {
        let mut out = Vec::new();
        for row in &self.rows {
            let baseline = row.cells.first().cloned().flatten();
            for (label, cell) in self.labels.iter().zip(&row.cells) {
                let mut r: [String; 14] = Default::default();
                r[0] = row.sender_id.clone();
                r[1] = label.clone();
                match cell {
                    None => r[2..].iter_mut().for_each(|c| *c = "-".into()),
                    Some(s) => {
                        r[2] = s.pings_transmitted.to_string();
                        r[3] = s.pings_received.to_string();
                        r[4] = fmt(s.rtt_min_ms);
                        r[5] = fmt(s.rtt_max_ms);
                        r[6] = fmt(s.rtt_range_ms());
                        r[7] = fmt(s.rtt_mean_ms);
                        r[8] = format!("{:.2}", s.ping_loss_pct);
                        r[9] = format!("{:.1}", s.modal_bin.rtt_value_ms);
                        r[10] = s.modal_bin.frequency.to_string();
                        match &baseline {
                            Some(b) => {
                                r[11] = fmt(s.rtt_mean_ms - b.rtt_mean_ms);
                                r[12] = fmt(s.rtt_range_ms() - b.rtt_range_ms());
                                r[13] = format!("{:.2}", s.ping_loss_pct - b.ping_loss_pct);
                            }
                            None => r[11..].iter_mut().for_each(|c| *c = "-".into()),
                        }
                    }
                }
                out.push(r);
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = COLUMNS.join(",");
        out.push('\n');
        for r in self.records() {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }

    /// Column-aligned table for terminals.
    pub fn to_text(&self) -> String {
        let records = self.records();
        let mut widths: Vec<usize> = COLUMNS.iter().map(|c| c.len()).collect();
        for r in &records {
            for (w, c) in widths.iter_mut().zip(r) {
                *w = (*w).max(c.len());
            }
        }
        let mut out = String::new();
        let mut line = |cells: &mut dyn Iterator<Item = &str>| {
            let parts: Vec<String> = cells
                .zip(&widths)
                .enumerate()
                .map(|(i, (c, w))| if i < 2 { format!("{c:<w$}") } else { format!("{c:>w$}") })
                .collect();
            let _ = writeln!(out, "{}", parts.join("  ").trim_end());
        };
        line(&mut COLUMNS.iter().copied());
        for r in &records {
            line(&mut r.iter().map(String::as_str));
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        out
    }
}
