//! Per-sender statistics: counts, RTT range and mean, loss, and the RTT
//! histogram with its modal bin.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::traffic::{PingOutcome, PingStatus};

pub const DEFAULT_BIN_MS: f64 = 0.1;

// absorbs representation error such as 8.9 / 0.1 = 88.999...
const BIN_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("histogram bin width must be positive, got {0}")]
    InvalidBin(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ModalBin {
    pub rtt_value_ms: f64,
    pub frequency: u64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub pings_transmitted: u64,
    pub pings_received: u64,
    pub rtt_min_ms: f64,
    pub rtt_max_ms: f64,
    pub rtt_mean_ms: f64,
    pub ping_loss_pct: f64,
    /// Set when nothing was transmitted; `ping_loss_pct` is then 0.
    pub loss_undefined: bool,
    pub modal_bin: ModalBin,
    pub dropped_unreachable: u64,
    pub dropped_collision: u64,
}

impl MetricsSummary {
    pub fn rtt_range_ms(&self) -> f64 {
        self.rtt_max_ms - self.rtt_min_ms
    }
}

fn delivered_rtts(outcomes: &[PingOutcome]) -> Vec<f64> {
    outcomes.iter().filter_map(|o| o.status.rtt_ms()).collect()
}

/// Aggregates outcomes. The result does not depend on outcome order.
pub fn summarize(outcomes: &[PingOutcome], bin_ms: f64) -> Result<MetricsSummary, MetricsError> {
    let histogram = rtt_histogram(outcomes, bin_ms)?;
    let mut rtts = delivered_rtts(outcomes);
    rtts.sort_by(f64::total_cmp);

    let tx = outcomes.len() as u64;
    let rx = rtts.len() as u64;
    let mut s = MetricsSummary {
        pings_transmitted: tx,
        pings_received: rx,
        loss_undefined: tx == 0,
        modal_bin: histogram.modal(),
        ..MetricsSummary::default()
    };
    if tx > 0 {
        s.ping_loss_pct = (tx - rx) as f64 / tx as f64 * 100.0;
    }
    if let (Some(&lo), Some(&hi)) = (rtts.first(), rtts.last()) {
        s.rtt_min_ms = lo;
        s.rtt_max_ms = hi;
        // summed in sorted order so the mean is permutation-invariant
        s.rtt_mean_ms = (rtts.iter().sum::<f64>() / rx as f64).clamp(lo, hi);
    }
    for o in outcomes {
        match o.status {
            PingStatus::DroppedUnreachable => s.dropped_unreachable += 1,
            PingStatus::DroppedCollision { .. } => s.dropped_collision += 1,
            PingStatus::Delivered { .. } => {}
        }
    }
    Ok(s)
}

/// Sparse histogram over half-open bins `[k * bin, (k + 1) * bin)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub bin_ms: f64,
    counts: BTreeMap<u64, u64>,
}

impl Histogram {
    fn bin_start(&self, k: u64) -> f64 {
        // round away representation noise so 89 * 0.1 prints as 8.9
        (k as f64 * self.bin_ms * 1e9).round() / 1e9
    }

    /// Non-empty bins as `(bin_start_ms, count)`, ascending.
    pub fn bins(&self) -> Vec<(f64, u64)> {
        self.counts.iter().map(|(&k, &c)| (self.bin_start(k), c)).collect()
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Highest-count bin, lowest bin on ties; zeros when empty.
    pub fn modal(&self) -> ModalBin {
        let mut best: Option<(u64, u64)> = None;
        for (&k, &c) in &self.counts {
            if best.is_none_or(|(_, bc)| c > bc) {
                best = Some((k, c));
            }
        }
        best.map_or(ModalBin::default(), |(k, c)| ModalBin {
            rtt_value_ms: self.bin_start(k),
            frequency: c,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_start_ms,count\n");
        for (start, count) in self.bins() {
            let _ = writeln!(out, "{start},{count}");
        }
        out
    }
}

pub fn rtt_histogram(outcomes: &[PingOutcome], bin_ms: f64) -> Result<Histogram, MetricsError> {
    if !(bin_ms > 0.0 && bin_ms.is_finite()) {
        return Err(MetricsError::InvalidBin(bin_ms));
    }
    let mut counts = BTreeMap::new();
    for rtt in delivered_rtts(outcomes) {
        let k = (rtt / bin_ms + BIN_EPSILON).floor().max(0.0) as u64;
        *counts.entry(k).or_insert(0) += 1;
    }
    Ok(Histogram { bin_ms, counts })
}

/// `(send_time_s, rtt_ms)` for delivered pings, in send order.
pub fn rtt_vector(outcomes: &[PingOutcome]) -> Vec<(f64, f64)> {
    let mut v: Vec<(f64, f64)> = outcomes
        .iter()
        .filter_map(|o| o.status.rtt_ms().map(|r| (o.send_time_s, r)))
        .collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    v
}

pub fn rtt_vector_csv(outcomes: &[PingOutcome]) -> String {
    let mut out = String::from("send_time_s,rtt_ms\n");
    for (t, r) in rtt_vector(outcomes) {
        let _ = writeln!(out, "{t},{r:.6}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn delivered(seq: u64, rtt: f64) -> PingOutcome {
        PingOutcome {
            seq,
            send_time_s: seq as f64 * 0.5,
            status: PingStatus::Delivered { rtt_ms: rtt },
            path: vec![0, 2, 1],
        }
    }

    fn lost(seq: u64) -> PingOutcome {
        PingOutcome {
            seq,
            send_time_s: seq as f64 * 0.5,
            status: PingStatus::DroppedUnreachable,
            path: vec![],
        }
    }

    #[test]
    fn loss_percentage() {
        let outcomes: Vec<_> = (0..2400).map(|i| if i < 1936 { delivered(i, 9.0) } else { lost(i) }).collect();
        let s = summarize(&outcomes, DEFAULT_BIN_MS).unwrap();
        assert_eq!((s.pings_transmitted, s.pings_received), (2400, 1936));
        assert!((s.ping_loss_pct - 19.33).abs() < 0.005);
        assert_eq!(s.dropped_unreachable, 464);
    }

    #[test]
    fn empty_and_all_dropped() {
        let s = summarize(&[], DEFAULT_BIN_MS).unwrap();
        assert_eq!(s, MetricsSummary { loss_undefined: true, ..Default::default() });
        let s = summarize(&[lost(0), lost(1)], DEFAULT_BIN_MS).unwrap();
        assert_eq!(s.ping_loss_pct, 100.0);
        assert_eq!((s.rtt_min_ms, s.rtt_max_ms, s.rtt_mean_ms), (0.0, 0.0, 0.0));
        assert!(!s.loss_undefined);
    }

    #[test]
    fn identical_rtts() {
        let s = summarize(&[delivered(0, 9.65), delivered(1, 9.65), delivered(2, 9.65)], 0.1).unwrap();
        assert_eq!((s.rtt_min_ms, s.rtt_max_ms, s.rtt_mean_ms), (9.65, 9.65, 9.65));
    }

    #[test]
    fn modal_bin_fixture() {
        let mut outcomes = Vec::new();
        let mut seq = 0;
        let mut push = |n: usize, lo: f64, step: f64| {
            for i in 0..n {
                outcomes.push(delivered(seq, lo + (i % 10) as f64 * step));
                seq += 1;
            }
        };
        push(140, 8.9, 0.009);
        push(120, 9.0, 0.009);
        push(60, 8.2, 0.009);
        push(80, 11.5, 0.009);
        let h = rtt_histogram(&outcomes, 0.1).unwrap();
        assert_eq!(h.modal(), ModalBin { rtt_value_ms: 8.9, frequency: 140 });
        assert_eq!(h.total(), 400);
        assert_eq!(summarize(&outcomes, 0.1).unwrap().modal_bin.frequency, 140);
    }

    #[test]
    fn histogram_edges_and_ties() {
        let h = rtt_histogram(&[delivered(0, 9.3)], 0.1).unwrap();
        assert_eq!(h.bins(), vec![(9.3, 1)]);
        let h = rtt_histogram(&[delivered(0, 9.05), delivered(1, 8.95)], 0.1).unwrap();
        assert_eq!(h.modal(), ModalBin { rtt_value_ms: 8.9, frequency: 1 });
        assert_eq!(h.to_csv(), "bin_start_ms,count\n8.9,1\n9,1\n");
        assert!(rtt_histogram(&[], 0.0).is_err());
        assert!(rtt_histogram(&[], -1.0).is_err());
    }

    #[test]
    fn vector_skips_drops() {
        let outcomes: Vec<_> = (0..6).map(|i| if i % 2 == 0 { delivered(i, 10.0) } else { lost(i) }).collect();
        let v = rtt_vector(&outcomes);
        assert_eq!(v.iter().map(|p| p.0).collect::<Vec<_>>(), vec![0.0, 1.0, 2.0]);
        assert!(rtt_vector(&[lost(0)]).is_empty());
    }

    proptest! {
        #[test]
        fn summary_invariants(rtts in prop::collection::vec(prop::option::of(8.0..200.0f64), 0..200), seed in any::<u64>()) {
            let outcomes: Vec<_> = rtts
                .iter()
                .enumerate()
                .map(|(i, r)| match r { Some(r) => delivered(i as u64, *r), None => lost(i as u64) })
                .collect();
            let s = summarize(&outcomes, 0.1).unwrap();
            prop_assert!(s.pings_received <= s.pings_transmitted);
            if s.pings_received > 0 {
                prop_assert!(s.rtt_min_ms <= s.rtt_mean_ms && s.rtt_mean_ms <= s.rtt_max_ms);
            }
            let h = rtt_histogram(&outcomes, 0.1).unwrap();
            prop_assert_eq!(h.total(), s.pings_received);
            prop_assert!(h.bins().iter().all(|&(_, c)| c <= s.modal_bin.frequency));

            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut shuffled = outcomes.clone();
            shuffled.shuffle(&mut rand::rngs::StdRng::seed_from_u64(seed));
            prop_assert_eq!(summarize(&shuffled, 0.1).unwrap(), s);
        }
    }
}
