//! Delay-weighted connectivity graph for one update interval and the
//! shortest-path routing over it.
//!
//! Node ids are dense: ground stations come first in declaration order,
//! then satellites in (plane, slot) order. Ground stations never link to
//! each other. Satellites link to each other only inside their own plane,
//! and only when inter-satellite links are enabled.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::fmt::Write as _;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geodesy::{self, GeoPoint, EciPosition, EARTH_RADIUS_KM, SPEED_OF_LIGHT_KM_S};
use crate::orbits::{self, Satellite};

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TopologyError {
    #[error("node {0} is not part of the snapshot")]
    UnknownNode(NodeId),
    #[error("no link between node {from} and node {to}")]
    InvalidPath { from: NodeId, to: NodeId },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NodeKind {
    Satellite { plane: u32, slot: u32 },
    GroundStation { index: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NodeRef {
    pub id: NodeId,
    pub kind: NodeKind,
}

impl NodeRef {
    pub fn is_satellite(&self) -> bool {
        matches!(self.kind, NodeKind::Satellite { .. })
    }
}

/// Undirected weighted graph, adjacency-list form.
#[derive(Debug, Clone, Default)]
pub struct Graph {
    adjacency: Vec<Vec<(NodeId, f64)>>,
}

impl Graph {
    pub fn new(node_count: usize) -> Self {
        Self {
            adjacency: vec![Vec::new(); node_count],
        }
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn add_edge(&mut self, a: NodeId, b: NodeId, weight: f64) {
        debug_assert!(weight >= 0.0 && a != b);
        self.adjacency[a].push((b, weight));
        self.adjacency[b].push((a, weight));
    }

    pub fn neighbors(&self, node: NodeId) -> &[(NodeId, f64)] {
        &self.adjacency[node]
    }

    pub fn edge_weight(&self, a: NodeId, b: NodeId) -> Option<f64> {
        self.adjacency
            .get(a)?
            .iter()
            .find(|(n, _)| *n == b)
            .map(|&(_, w)| w)
    }

    /// Each undirected edge once, as `(smaller id, larger id, weight)`.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId, f64)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(a, adj)| adj.iter().filter(move |(b, _)| a < *b).map(move |&(b, w)| (a, b, w)))
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }
}

/// Single-source shortest paths: distance and next-hop per destination.
#[derive(Debug, Clone, PartialEq)]
pub struct ShortestPaths {
    pub source: NodeId,
    /// `f64::INFINITY` for unreachable nodes.
    pub distance: Vec<f64>,
    /// First hop out of `source` towards each node.
    pub next_hop: Vec<Option<NodeId>>,
    predecessor: Vec<Option<NodeId>>,
}

impl ShortestPaths {
    pub fn cost(&self, dst: NodeId) -> f64 {
        self.distance[dst]
    }

    pub fn is_reachable(&self, dst: NodeId) -> bool {
        self.distance[dst].is_finite()
    }

    /// Node sequence from the source to `dst`, both ends included.
    pub fn path_to(&self, dst: NodeId) -> Option<Vec<NodeId>> {
        if !self.is_reachable(dst) {
            return None;
        }
        let mut path = vec![dst];
        let mut cur = dst;
        while let Some(p) = self.predecessor[cur] {
            path.push(p);
            cur = p;
        }
        path.reverse();
        Some(path)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct HeapEntry {
    cost: f64,
    node: NodeId,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed: BinaryHeap is a max-heap
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Dijkstra over non-negative edge weights. Nodes settle in (cost, id)
/// order and equal-cost predecessors resolve to the smallest id, so the
/// result does not depend on edge insertion order.
pub fn dijkstra(graph: &Graph, source: NodeId) -> ShortestPaths {
    let n = graph.node_count();
    let mut distance = vec![f64::INFINITY; n];
    let mut predecessor: Vec<Option<NodeId>> = vec![None; n];
    let mut next_hop: Vec<Option<NodeId>> = vec![None; n];
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::new();

    distance[source] = 0.0;
    heap.push(HeapEntry { cost: 0.0, node: source });

    while let Some(HeapEntry { cost, node }) = heap.pop() {
        if settled[node] || cost > distance[node] {
            continue;
        }
        settled[node] = true;
        next_hop[node] = match predecessor[node] {
            None => None,
            Some(p) if p == source => Some(node),
            Some(p) => next_hop[p],
        };
        for &(nb, w) in graph.neighbors(node) {
            if settled[nb] {
                continue;
            }
            let candidate = cost + w;
            let better = candidate < distance[nb]
                || (candidate == distance[nb] && predecessor[nb].is_some_and(|p| node < p));
            if better {
                let improved = candidate < distance[nb];
                distance[nb] = candidate;
                predecessor[nb] = Some(node);
                if improved {
                    heap.push(HeapEntry { cost: candidate, node: nb });
                }
            }
        }
    }

    ShortestPaths {
        source,
        distance,
        next_hop,
        predecessor,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IslMode {
    /// Each satellite links to its two in-plane neighbours.
    #[default]
    Ring,
    /// Every pair within a plane that has line of sight (and is within
    /// `max_isl_range_km`, if set).
    SamePlane,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinkRules {
    pub enable_intersatellite_links: bool,
    pub min_elevation_deg: f64,
    pub isl_mode: IslMode,
    pub max_isl_range_km: Option<f64>,
}

impl LinkRules {
    pub fn new(enable_intersatellite_links: bool, min_elevation_deg: f64) -> Self {
        Self {
            enable_intersatellite_links,
            min_elevation_deg,
            isl_mode: IslMode::Ring,
            max_isl_range_km: None,
        }
    }

    /// Ground-to-ground links never exist.
    pub const fn allow_gs_gs(&self) -> bool {
        false
    }
}

/// Shortest-path answer between two nodes.
#[derive(Debug, Clone, PartialEq)]
pub enum Route {
    Path(Vec<NodeId>),
    Unreachable,
}

impl Route {
    pub fn path(&self) -> Option<&[NodeId]> {
        match self {
            Route::Path(p) => Some(p),
            Route::Unreachable => None,
        }
    }
}

/// The network as it stands at `time_s`. Immutable once built; routing
/// tables are computed on first request per source and then cached.
#[derive(Debug)]
pub struct TopologySnapshot {
    pub time_s: f64,
    pub nodes: Vec<NodeRef>,
    pub positions: Vec<EciPosition>,
    graph: Graph,
    tables: Vec<OnceLock<ShortestPaths>>,
}

/// One-way light delay over `distance_km`.
pub fn propagation_delay_ms(distance_km: f64) -> f64 {
    distance_km / SPEED_OF_LIGHT_KM_S * 1000.0
}

/// True when the segment between two points clears the Earth's surface.
fn has_line_of_sight(a: &EciPosition, b: &EciPosition) -> bool {
    let (pa, pb) = (a.as_array(), b.as_array());
    let d = geodesy::sub(pb, pa);
    let len2 = geodesy::dot(d, d);
    if len2 == 0.0 {
        return true;
    }
    let t = (-geodesy::dot(pa, d) / len2).clamp(0.0, 1.0);
    let closest = [pa[0] + t * d[0], pa[1] + t * d[1], pa[2] + t * d[2]];
    geodesy::norm(closest) > EARTH_RADIUS_KM
}

pub fn build_snapshot(
    time_s: f64,
    satellites: &[Satellite],
    ground: &[GeoPoint],
    rules: &LinkRules,
    theta0_deg: f64,
) -> TopologySnapshot {
    let g = ground.len();
    let n = g + satellites.len();
    let mut nodes = Vec::with_capacity(n);
    let mut positions = Vec::with_capacity(n);

    for (index, p) in ground.iter().enumerate() {
        nodes.push(NodeRef {
            id: index,
            kind: NodeKind::GroundStation { index },
        });
        positions.push(geodesy::geodetic_to_eci(p, time_s, theta0_deg));
    }
    for (i, s) in satellites.iter().enumerate() {
        nodes.push(NodeRef {
            id: g + i,
            kind: NodeKind::Satellite {
                plane: s.plane,
                slot: s.slot,
            },
        });
        positions.push(orbits::position_at(&s.elements, time_s));
    }

    let mut graph = Graph::new(n);

    for gs in 0..g {
        for sat in g..n {
            // a failure here means the two coincide, which no orbit allows
            if geodesy::is_visible(&positions[gs], &positions[sat], rules.min_elevation_deg).unwrap_or(false) {
                graph.add_edge(gs, sat, propagation_delay_ms(positions[gs].distance_km(&positions[sat])));
            }
        }
    }

    if rules.enable_intersatellite_links {
        let mut by_slot: HashMap<(u32, u32), NodeId> = HashMap::with_capacity(satellites.len());
        for (i, s) in satellites.iter().enumerate() {
            by_slot.insert((s.plane, s.slot), g + i);
        }
        let try_link = |a: NodeId, b: NodeId, graph: &mut Graph| {
            let distance = positions[a].distance_km(&positions[b]);
            if rules.max_isl_range_km.is_some_and(|max| distance > max) {
                return;
            }
            if !has_line_of_sight(&positions[a], &positions[b]) {
                return;
            }
            graph.add_edge(a, b, propagation_delay_ms(distance));
        };
        for (i, s) in satellites.iter().enumerate() {
            let a = g + i;
            match rules.isl_mode {
                IslMode::Ring => {
                    // S = 2 has a single neighbour; S = 1 has none
                    if s.plane_size < 2 || (s.plane_size == 2 && s.slot == 1) {
                        continue;
                    }
                    let next = (s.slot + 1) % s.plane_size;
                    if let Some(&b) = by_slot.get(&(s.plane, next)) {
                        try_link(a, b, &mut graph);
                    }
                }
                IslMode::SamePlane => {
                    for (j, other) in satellites.iter().enumerate().skip(i + 1) {
                        if other.plane == s.plane {
                            try_link(a, g + j, &mut graph);
                        }
                    }
                }
            }
        }
    }

    let tables = (0..n).map(|_| OnceLock::new()).collect();
    TopologySnapshot {
        time_s,
        nodes,
        positions,
        graph,
        tables,
    }
}

impl TopologySnapshot {
    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Routing table of `src`, computed on first use.
    pub fn shortest_paths(&self, src: NodeId) -> Result<&ShortestPaths, TopologyError> {
        let cell = self.tables.get(src).ok_or(TopologyError::UnknownNode(src))?;
        Ok(cell.get_or_init(|| dijkstra(&self.graph, src)))
    }

    pub fn route(&self, src: NodeId, dst: NodeId) -> Result<Route, TopologyError> {
        if dst >= self.node_count() {
            return Err(TopologyError::UnknownNode(dst));
        }
        Ok(match self.shortest_paths(src)?.path_to(dst) {
            Some(p) => Route::Path(p),
            None => Route::Unreachable,
        })
    }

    /// Sum of one-way edge delays along `path`.
    pub fn path_delay_ms(&self, path: &[NodeId]) -> Result<f64, TopologyError> {
        path.windows(2).try_fold(0.0, |acc, hop| {
            self.graph
                .edge_weight(hop[0], hop[1])
                .map(|w| acc + w)
                .ok_or(TopologyError::InvalidPath {
                    from: hop[0],
                    to: hop[1],
                })
        })
    }

    pub fn edge_delay_ms(&self, a: NodeId, b: NodeId) -> Option<f64> {
        self.graph.edge_weight(a, b)
    }

    /// Edge list rows `time_s,node_a,node_b,delay_ms` (no header).
    pub fn edges_csv_rows(&self) -> String {
        let mut out = String::new();
        for (a, b, w) in self.graph.edges() {
            let _ = writeln!(out, "{:.3},{a},{b},{w:.6}", self.time_s);
        }
        out
    }
}

pub const SNAPSHOT_CSV_HEADER: &str = "time_s,node_a,node_b,delay_ms";
