//! Ping applications: send schedules, forwarding along the snapshot route,
//! and the bufferless channel model.
//!
//! A forwarding node can handle one packet at a time. A packet occupies a
//! node for `[arrival, arrival + tx_duration)`; a packet arriving while the
//! node is occupied is dropped, never queued.

use serde::Serialize;

use crate::topology::{NodeId, Route, TopologySnapshot};

/// How a sender decides when to ping.
#[derive(Debug, Clone, PartialEq)]
pub enum SendPattern {
    /// `start_time_s + k * interval_s` for k = 0, 1, ...
    Periodic { start_time_s: f64, interval_s: f64 },
    /// Explicit absolute send times, sorted ascending.
    Schedule(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PingAppConfig {
    pub source: NodeId,
    pub destination: NodeId,
    pub pattern: SendPattern,
    pub count: Option<usize>,
}

impl PingAppConfig {
    pub fn periodic(source: NodeId, destination: NodeId, start_time_s: f64, interval_s: f64) -> Self {
        Self {
            source,
            destination,
            pattern: SendPattern::Periodic {
                start_time_s,
                interval_s,
            },
            count: None,
        }
    }

    pub fn scheduled(source: NodeId, destination: NodeId, mut times_s: Vec<f64>) -> Self {
        times_s.sort_by(f64::total_cmp);
        Self {
            source,
            destination,
            pattern: SendPattern::Schedule(times_s),
            count: None,
        }
    }

    pub fn with_count(mut self, count: usize) -> Self {
        self.count = Some(count);
        self
    }

    pub fn start_time_s(&self) -> Option<f64> {
        match &self.pattern {
            SendPattern::Periodic { start_time_s, .. } => Some(*start_time_s),
            SendPattern::Schedule(times) => times.first().copied(),
        }
    }
}

/// Send times strictly before `sim_limit_s`, paired with sequence numbers
/// counting from 0.
pub fn schedule_sends(cfg: &PingAppConfig, sim_limit_s: f64) -> Vec<(f64, u64)> {
    let cap = cfg.count.unwrap_or(usize::MAX);
    let times: Vec<f64> = match &cfg.pattern {
        SendPattern::Periodic {
            start_time_s,
            interval_s,
        } => {
            if *interval_s <= 0.0 {
                return Vec::new();
            }
            // multiply rather than accumulate so long schedules do not drift
            (0u64..)
                .map(|k| start_time_s + k as f64 * interval_s)
                .take_while(|&t| t < sim_limit_s)
                .take(cap)
                .collect()
        }
        SendPattern::Schedule(times) => times.iter().copied().filter(|&t| t < sim_limit_s).take(cap).collect(),
    };
    times.into_iter().zip(0u64..).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PingStatus {
    Delivered { rtt_ms: f64 },
    DroppedUnreachable,
    DroppedCollision { node: NodeId, time_s: f64 },
}

impl PingStatus {
    pub fn label(&self) -> &'static str {
        match self {
            PingStatus::Delivered { .. } => "delivered",
            PingStatus::DroppedUnreachable => "dropped_unreachable",
            PingStatus::DroppedCollision { .. } => "dropped_collision",
        }
    }

    pub fn rtt_ms(&self) -> Option<f64> {
        match self {
            PingStatus::Delivered { rtt_ms } => Some(*rtt_ms),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PingOutcome {
    pub seq: u64,
    pub send_time_s: f64,
    pub status: PingStatus,
    /// Forward route taken; empty when unreachable.
    pub path: Vec<NodeId>,
}

impl PingOutcome {
    pub fn is_delivered(&self) -> bool {
        matches!(self.status, PingStatus::Delivered { .. })
    }
}

/// Channel occupancy parameters shared by every node of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub tx_duration_s: f64,
    pub processing_delay_s: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            tx_duration_s: 0.001,
            processing_delay_s: 0.0,
        }
    }
}

/// Busy intervals per node. Intervals on one node never overlap.
#[derive(Debug, Clone, Default)]
pub struct NodeChannels {
    busy: Vec<Vec<(f64, f64)>>,
}

impl NodeChannels {
    pub fn new(node_count: usize) -> Self {
        Self {
            busy: vec![Vec::new(); node_count],
        }
    }

    /// Half-open overlap test against every reservation on `node`. An empty
    /// interval overlaps nothing.
    pub fn is_busy(&self, node: NodeId, start_s: f64, end_s: f64) -> bool {
        start_s < end_s && self.busy[node].iter().any(|&(s, e)| start_s < e && s < end_s)
    }

    /// Reserves `[start_s, end_s)` unless it overlaps; returns whether it did.
    pub fn try_reserve(&mut self, node: NodeId, start_s: f64, end_s: f64) -> bool {
        if self.is_busy(node, start_s, end_s) {
            return false;
        }
        if end_s > start_s {
            self.busy[node].push((start_s, end_s));
        }
        true
    }

    /// Forgets reservations that end at or before `time_s`.
    pub fn prune_before(&mut self, time_s: f64) {
        for intervals in &mut self.busy {
            intervals.retain(|&(_, e)| e > time_s);
        }
    }

    pub fn reservations(&self, node: NodeId) -> &[(f64, f64)] {
        &self.busy[node]
    }
}

/// Forwards one leg along `path` starting at `depart_s`. Returns the arrival
/// time at the last node, or the node and time of the collision.
fn forward_leg(
    path: &[NodeId],
    depart_s: f64,
    snapshot: &TopologySnapshot,
    channels: &mut NodeChannels,
    params: &ChannelParams,
) -> Result<f64, (NodeId, f64)> {
    let mut t = depart_s;
    let last = path.len() - 1;
    for (i, hop) in path.windows(2).enumerate() {
        let delay_ms = snapshot
            .edge_delay_ms(hop[0], hop[1])
            .expect("route hops are snapshot edges");
        t += delay_ms / 1000.0;
        if i + 1 == last {
            break;
        }
        let node = hop[1];
        if !channels.try_reserve(node, t, t + params.tx_duration_s) {
            return Err((node, t));
        }
        t += params.processing_delay_s;
    }
    Ok(t)
}

/// Sends one ping at `send_time_s` and its reply, reserving channel time at
/// every intermediate node on both legs.
pub fn transmit(
    source: NodeId,
    destination: NodeId,
    seq: u64,
    send_time_s: f64,
    snapshot: &TopologySnapshot,
    channels: &mut NodeChannels,
    params: &ChannelParams,
) -> PingOutcome {
    let path = match snapshot.route(source, destination) {
        Ok(Route::Path(p)) => p,
        Ok(Route::Unreachable) | Err(_) => {
            return PingOutcome {
                seq,
                send_time_s,
                status: PingStatus::DroppedUnreachable,
                path: Vec::new(),
            }
        }
    };
    let status = match forward_leg(&path, send_time_s, snapshot, channels, params) {
        Err((node, time_s)) => PingStatus::DroppedCollision { node, time_s },
        Ok(arrival) => {
            let reversed: Vec<NodeId> = path.iter().rev().copied().collect();
            let reply_depart = if path.len() > 1 {
                arrival + params.processing_delay_s
            } else {
                arrival
            };
            match forward_leg(&reversed, reply_depart, snapshot, channels, params) {
                Err((node, time_s)) => PingStatus::DroppedCollision { node, time_s },
                Ok(back) => PingStatus::Delivered {
                    rtt_ms: (back - send_time_s) * 1000.0,
                },
            }
        }
    };
    PingOutcome {
        seq,
        send_time_s,
        status,
        path,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodesy::{coverage_geometry, GeoPoint, EARTH_RADIUS_KM, SPEED_OF_LIGHT_KM_S};
    use crate::orbits::{OrbitalElements, Satellite};
    use crate::topology::{build_snapshot, LinkRules};
    use proptest::prelude::*;

    fn equatorial(anomaly: f64) -> Satellite {
        Satellite {
            name: "s".into(),
            plane: 0,
            slot: 0,
            plane_size: 1,
            elements: OrbitalElements::circular(600.0, 0.0, 0.0, anomaly).unwrap(),
        }
    }

    #[test]
    fn periodic_counts() {
        assert_eq!(schedule_sends(&PingAppConfig::periodic(0, 1, 0.0, 0.5), 1200.0).len(), 2400);
        assert_eq!(schedule_sends(&PingAppConfig::periodic(0, 1, 20.0, 0.5), 307.0).len(), 574);
        assert_eq!(schedule_sends(&PingAppConfig::periodic(0, 1, 0.0, 0.5), 307.0).len(), 614);
        // 24 h at 300 s from a 10 s offset
        assert_eq!(schedule_sends(&PingAppConfig::periodic(0, 1, 10.0, 300.0), 86_400.0).len(), 288);
        let capped = PingAppConfig::periodic(0, 1, 0.0, 1.0).with_count(3);
        assert_eq!(schedule_sends(&capped, 100.0), vec![(0.0, 0), (1.0, 1), (2.0, 2)]);
        assert!(schedule_sends(&PingAppConfig::periodic(0, 1, 50.0, 1.0), 50.0).is_empty());
    }

    #[test]
    fn explicit_schedule_is_half_open() {
        let cfg = PingAppConfig::scheduled(0, 1, vec![300.0, 60.0, 120.0, 200.0]);
        assert_eq!(schedule_sends(&cfg, 200.0), vec![(60.0, 0), (120.0, 1)]);
        assert_eq!(cfg.start_time_s(), Some(60.0));
    }

    #[test]
    fn channel_overlap_is_half_open() {
        let mut ch = NodeChannels::new(2);
        assert!(ch.try_reserve(0, 1.0, 2.0));
        assert!(!ch.try_reserve(0, 1.5, 2.5));
        assert!(ch.try_reserve(0, 2.0, 3.0));
        assert!(ch.try_reserve(0, 0.0, 1.0));
        assert!(ch.try_reserve(1, 1.5, 2.5));
        // zero-length occupancy never collides
        assert!(ch.try_reserve(0, 1.5, 1.5));
        ch.prune_before(2.0);
        assert_eq!(ch.reservations(0), &[(2.0, 3.0)]);
    }

    /// Ground stations symmetric about a satellite at 0° longitude, each at
    /// slant range `slant_km`.
    fn symmetric_pair(slant_km: f64) -> (Vec<GeoPoint>, f64) {
        let r = EARTH_RADIUS_KM + 600.0;
        // law of cosines for the central angle
        let cos_b = (EARTH_RADIUS_KM.powi(2) + r * r - slant_km * slant_km) / (2.0 * EARTH_RADIUS_KM * r);
        let lon = cos_b.acos().to_degrees();
        (
            vec![GeoPoint::surface(0.0, -lon).unwrap(), GeoPoint::surface(0.0, lon).unwrap()],
            lon,
        )
    }

    #[test]
    fn sole_sender_rtt() {
        let (gs, _) = symmetric_pair(685.0);
        let snap = build_snapshot(0.0, &[equatorial(0.0)], &gs, &LinkRules::new(false, 25.0), 0.0);
        let mut ch = NodeChannels::new(3);
        let out = transmit(0, 1, 0, 0.0, &snap, &mut ch, &ChannelParams::default());
        let rtt = out.status.rtt_ms().unwrap();
        let oracle = 4.0 * 685.0 / SPEED_OF_LIGHT_KM_S * 1000.0;
        assert!((rtt - oracle).abs() < 1e-9, "{rtt} vs {oracle}");
        assert!((rtt - 9.14).abs() < 0.01);
        assert_eq!(out.path, vec![0, 2, 1]);
        assert!((rtt - 2.0 * snap.path_delay_ms(&out.path).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn co_located_senders_collide() {
        // two senders at one site, one receiver
        let (mut gs, lon) = symmetric_pair(685.0);
        gs.insert(1, GeoPoint::surface(0.0, -lon).unwrap());
        let snap = build_snapshot(0.0, &[equatorial(0.0)], &gs, &LinkRules::new(false, 25.0), 0.0);
        let params = ChannelParams::default();
        let mut ch = NodeChannels::new(4);
        let a = transmit(0, 2, 0, 5.0, &snap, &mut ch, &params);
        let b = transmit(1, 2, 0, 5.0, &snap, &mut ch, &params);
        assert!(a.is_delivered());
        assert!(matches!(b.status, PingStatus::DroppedCollision { node: 3, .. }));

        // staggered by more than the occupancy: both get through
        let mut ch = NodeChannels::new(4);
        let a = transmit(0, 2, 0, 5.0, &snap, &mut ch, &params);
        let b = transmit(1, 2, 0, 5.0 + 2.0 * params.tx_duration_s, &snap, &mut ch, &params);
        assert!(a.is_delivered() && b.is_delivered());

        // zero occupancy disables collisions entirely
        let free = ChannelParams {
            tx_duration_s: 0.0,
            processing_delay_s: 0.0,
        };
        let mut ch = NodeChannels::new(4);
        assert!(transmit(0, 2, 0, 5.0, &snap, &mut ch, &free).is_delivered());
        assert!(transmit(1, 2, 0, 5.0, &snap, &mut ch, &free).is_delivered());
    }

    #[test]
    fn unreachable_is_a_drop() {
        let gs = vec![GeoPoint::surface(0.0, 0.0).unwrap(), GeoPoint::surface(0.0, 90.0).unwrap()];
        let snap = build_snapshot(0.0, &[equatorial(0.0)], &gs, &LinkRules::new(false, 25.0), 0.0);
        let out = transmit(0, 1, 7, 1.0, &snap, &mut NodeChannels::new(3), &ChannelParams::default());
        assert_eq!(out.status, PingStatus::DroppedUnreachable);
        assert!(out.path.is_empty());
        assert_eq!(out.seq, 7);
    }

    #[test]
    fn processing_delay_adds_per_forward() {
        let (gs, _) = symmetric_pair(685.0);
        let snap = build_snapshot(0.0, &[equatorial(0.0)], &gs, &LinkRules::new(false, 25.0), 0.0);
        let params = ChannelParams {
            tx_duration_s: 0.001,
            processing_delay_s: 0.002,
        };
        let out = transmit(0, 1, 0, 0.0, &snap, &mut NodeChannels::new(3), &params);
        let base = 2.0 * snap.path_delay_ms(&out.path).unwrap();
        // satellite twice, reply generation once
        assert!((out.status.rtt_ms().unwrap() - base - 6.0).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn delivered_rtt_respects_floor(anomaly in -8.0..8.0f64, elev in 25.0..90.0f64) {
            let g = coverage_geometry(600.0, elev).unwrap();
            let lon = g.central_deg * 0.9;
            let gs = vec![GeoPoint::surface(0.0, -lon).unwrap(), GeoPoint::surface(0.0, lon).unwrap()];
            let snap = build_snapshot(0.0, &[equatorial(anomaly)], &gs, &LinkRules::new(false, 25.0), 0.0);
            let out = transmit(0, 1, 0, 0.0, &snap, &mut NodeChannels::new(3), &ChannelParams::default());
            if let Some(rtt) = out.status.rtt_ms() {
                prop_assert!(rtt >= 4.0 * 600.0 / SPEED_OF_LIGHT_KM_S * 1000.0 - 1e-9);
            }
        }

        #[test]
        fn every_send_scheduled_once(start in 0.0..100.0f64, interval in 0.1..50.0f64, limit in 0.0..2000.0f64) {
            let sends = schedule_sends(&PingAppConfig::periodic(0, 1, start, interval), limit);
            let expected = if limit <= start { 0 } else { ((limit - start) / interval).ceil() as usize };
            // floating point at the boundary may shift the count by one
            prop_assert!(sends.len().abs_diff(expected) <= 1);
            prop_assert!(sends.iter().all(|&(t, _)| t < limit && t >= start));
            prop_assert!(sends.windows(2).all(|w| w[0].0 < w[1].0 && w[1].1 == w[0].1 + 1));
        }
    }
}
