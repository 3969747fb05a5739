//! Request–path–vehicle graph construction for one decision epoch.
//!
//! Offline partial paths anchored at vehicle positions are matched against
//! the current batch ([`process_offline_paths`]), completed over zones of a
//! size picked per path ([`complete_paths`]), and finally checked exactly
//! against every wait and delay limit ([`identify_edges`]).
//!
//! Times inside candidates are relative to the epoch time `t`; the finished
//! graph stores absolute times.

mod complete;
mod edges;
mod offline;

pub use complete::{complete_paths, filter_redundant, pick_zoning, Completion, CompletionOutput};
pub use edges::identify_edges;
pub use offline::{get_paths_for_vehicle, process_offline_paths, scan_path, RawCandidate};

use crate::fleet::{AssignedRequest, VehicleId, VehicleState};
use crate::network::{LocationId, Request, RequestId, RoadNetwork};
use crate::pathstore::{PathId, PathIndex};
use crate::zoning::{ZoneId, Zoning};
use crate::Seconds;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::{self, Write};

#[derive(Clone, Debug, PartialEq)]
pub struct RpvConfig {
    /// Maximum wait between arrival and pickup.
    pub tau: Seconds,
    /// Maximum extra in-vehicle time over the direct trip.
    pub lambda: Seconds,
    /// Target number of distinct destinations after zone abstraction.
    pub max_destinations: usize,
    /// Search-node cap per partial path during completion.
    pub node_budget: usize,
}

impl Default for RpvConfig {
    fn default() -> Self {
        RpvConfig { tau: 120, lambda: 240, max_destinations: 12, node_budget: 10_000 }
    }
}

/// Latest-time window for visiting a destination, relative to `t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Window {
    pub lb: Seconds,
    pub ub: Seconds,
}

impl Window {
    pub fn for_request(r: &Request, t: Seconds, network: &RoadNetwork, lambda: Seconds) -> Window {
        let lb = r.arrival - t + network.time(r.origin, r.destination) as Seconds;
        Window { lb, ub: lb + lambda }
    }

    fn merge(&mut self, other: Window) {
        self.lb = self.lb.min(other.lb);
        self.ub = self.ub.max(other.ub);
    }
}

/// Vehicles sharing start location, start time and commitments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Anchor {
    pub location: LocationId,
    pub available_at: Seconds,
    pub commitments: Vec<AssignedRequest>,
    /// Vehicle ids with their capacities.
    pub vehicles: Vec<(VehicleId, u32)>,
}

/// Groups vehicles into anchors, ordered by (location, time, commitments).
pub fn build_anchors(vehicles: &[VehicleState]) -> Vec<Anchor> {
    let mut groups: BTreeMap<(LocationId, Seconds, Vec<(RequestId, bool)>), Anchor> = BTreeMap::new();
    for v in vehicles {
        let mut commitments = v.assigned.clone();
        commitments.sort_by_key(|a| a.request.id);
        let sig = commitments.iter().map(|a| (a.request.id, a.picked_up)).collect();
        groups
            .entry((v.location, v.available_at, sig))
            .or_insert_with(|| Anchor { location: v.location, available_at: v.available_at, commitments, vehicles: Vec::new() })
            .vehicles
            .push((v.id, v.capacity));
    }
    groups.into_values().collect()
}

/// A request a candidate path could carry.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CandidateRequest {
    pub request: RequestId,
    pub destination: LocationId,
    /// Prefix position of the pickup; `None` when already onboard.
    pub pickup: Option<usize>,
    /// Latest drop time relative to `t` (`ub`), with `lb` for ordering.
    pub window: Window,
    /// Already bound to the anchor's vehicles: must be served.
    pub committed: bool,
}

/// A partial path compacted to the nodes where something happens.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidateInfo {
    pub source: PathId,
    /// Nodes with visit times relative to `t`.
    pub prefix: Vec<(LocationId, Seconds)>,
    pub requests: Vec<CandidateRequest>,
    /// Destinations still to be reached after the prefix.
    pub dropoffs: BTreeMap<LocationId, Window>,
}

/// Key of a candidate: anchor index and offline path.
pub type CandidateKey = (usize, PathId);

/// A node of a zone path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PathNode {
    Location(LocationId),
    Zone(ZoneId),
}

impl fmt::Display for PathNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathNode::Location(l) => write!(f, "{l}"),
            PathNode::Zone(z) => write!(f, "Z{}", z.0),
        }
    }
}

/// Where a request is dropped on a path, checked against its deadline.
///
/// `nodes`/`times` describe the whole path (times relative to `t`); drops
/// inside a zone are charged the zone visit time plus the zone size.
pub fn locate_drop(
    nodes: &[PathNode],
    times: &[Seconds],
    zoning: &Zoning,
    after: Option<usize>,
    destination: LocationId,
    ub: Seconds,
) -> Option<usize> {
    let from = after.map_or(0, |p| p + 1);
    for n in from..nodes.len() {
        let (hit, slack) = match nodes[n] {
            PathNode::Location(l) => (l == destination, 0),
            PathNode::Zone(z) => (zoning.zone(destination) == z, zoning.size()),
        };
        if hit {
            return (times[n] + slack <= ub).then_some(n);
        }
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ZonePathId(pub u32);

impl ZonePathId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ZonePathId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "M{}", self.0)
    }
}

/// A completed path: location prefix followed by zone suffix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZonePath {
    pub id: ZonePathId,
    pub anchor: usize,
    pub source: PathId,
    pub nodes: Vec<PathNode>,
    /// Absolute planned visit times.
    pub times: Vec<Seconds>,
    /// Index into the zonings the suffix was built with.
    pub zoning: usize,
    /// Number of leading location nodes.
    pub prefix_len: usize,
}

impl ZonePath {
    pub fn start(&self) -> LocationId {
        match self.nodes[0] {
            PathNode::Location(l) => l,
            PathNode::Zone(_) => unreachable!("paths start at a location"),
        }
    }

    pub fn start_time(&self) -> Seconds {
        self.times[0]
    }

    pub fn end_time(&self) -> Seconds {
        *self.times.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Request `j` may ride path `m`: picked up at `pickup`, dropped at `dropoff`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RequestEdge {
    pub request: RequestId,
    pub pickup: usize,
    pub dropoff: usize,
}

/// Where a committed request is served on a path.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CommitmentStop {
    pub request: RequestId,
    pub pickup: Option<usize>,
    pub dropoff: usize,
}

#[derive(Clone, Debug, Default)]
pub struct RpvGraph {
    pub t: Seconds,
    pub paths: Vec<ZonePath>,
    /// Per path: requests that may be assigned to it.
    pub request_edges: Vec<Vec<RequestEdge>>,
    /// Per path: vehicles that may take it.
    pub vehicle_edges: Vec<Vec<VehicleId>>,
    /// Per path: where the anchor's committed requests are served.
    pub commitments: Vec<Vec<CommitmentStop>>,
    /// Per path and position: committed passengers on the way into it.
    pub committed_load: Vec<Vec<u32>>,
    pub capacity: BTreeMap<VehicleId, u32>,
    /// Data of every request with an edge, plus committed ones.
    pub requests: BTreeMap<RequestId, Request>,
    /// Objective weight per request (1 when absent).
    pub weights: BTreeMap<RequestId, f64>,
}

impl RpvGraph {
    pub fn weight(&self, r: RequestId) -> f64 {
        self.weights.get(&r).copied().unwrap_or(1.0)
    }

    /// b: the request is in the vehicle on the way into position `n`.
    pub fn onboard(&self, e: &RequestEdge, n: usize) -> bool {
        e.pickup < n && n <= e.dropoff
    }

    /// N: free seats of vehicle `v` on the way into position `n` of `m`
    /// (0 when `v` may not take `m`).
    pub fn free_seats(&self, v: VehicleId, m: ZonePathId, n: usize) -> u32 {
        if !self.vehicle_edges[m.index()].contains(&v) {
            return 0;
        }
        self.capacity[&v].saturating_sub(self.committed_load[m.index()][n])
    }

    /// Paths a request may ride.
    pub fn request_paths(&self, r: RequestId) -> Vec<ZonePathId> {
        (0..self.paths.len())
            .filter(|&m| self.request_edges[m].iter().any(|e| e.request == r))
            .map(|m| ZonePathId(m as u32))
            .collect()
    }

    /// Paths a vehicle may take.
    pub fn vehicle_paths(&self, v: VehicleId) -> Vec<ZonePathId> {
        (0..self.paths.len()).filter(|&m| self.vehicle_edges[m].contains(&v)).map(|m| ZonePathId(m as u32)).collect()
    }

    pub fn vehicles(&self) -> impl Iterator<Item = VehicleId> + '_ {
        self.capacity.keys().copied()
    }

    /// Plain-text dump for fixtures and debugging.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "t {}", self.t);
        for (m, p) in self.paths.iter().enumerate() {
            let nodes: Vec<String> = p.nodes.iter().zip(&p.times).map(|(n, t)| format!("{n}@{t}")).collect();
            let _ = writeln!(s, "path {} anchor {} source {} zoning {}", p.id, p.anchor, p.source, p.zoning);
            let _ = writeln!(s, "  nodes {}", nodes.join(" "));
            let vs: Vec<String> = self.vehicle_edges[m].iter().map(|v| format!("{v}")).collect();
            let _ = writeln!(s, "  vehicles {}", vs.join(" "));
            for e in &self.request_edges[m] {
                let b: Vec<&str> = (0..p.len()).map(|n| if self.onboard(e, n) { "1" } else { "0" }).collect();
                let _ = writeln!(s, "  request {} pickup {} dropoff {} b {}", e.request, e.pickup, e.dropoff, b.join(""));
            }
            for v in &self.vehicle_edges[m] {
                let free: Vec<String> = (0..p.len()).map(|n| format!("{}", self.free_seats(*v, p.id, n))).collect();
                let _ = writeln!(s, "  seats {} {}", v, free.join(","));
            }
        }
        s
    }
}

/// Counters from one graph build.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RpvStats {
    pub anchors: usize,
    pub candidates: usize,
    pub completions: usize,
    pub truncated: usize,
    pub paths: usize,
}

/// Everything the builder reads but never changes.
pub struct RpvContext<'a> {
    pub network: &'a RoadNetwork,
    pub index: &'a PathIndex,
    /// Zonings in ascending size; the first should be size 0.
    pub zonings: &'a [Zoning],
    pub config: RpvConfig,
}

/// Full pipeline for one epoch.
pub fn build_rpv_graph(ctx: &RpvContext<'_>, t: Seconds, demand: &[Request], vehicles: &[VehicleState]) -> (RpvGraph, RpvStats) {
    let anchors = build_anchors(vehicles);
    let candidates = process_offline_paths(t, ctx.index, ctx.network, demand, &anchors, &ctx.config);
    let done = complete_paths(&candidates, ctx.zonings, ctx.network, &ctx.config);
    let mut graph = identify_edges(t, &done.completions, &candidates, &anchors, ctx.zonings, demand, &ctx.config);
    for v in vehicles {
        graph.capacity.insert(v.id, v.capacity);
    }
    let stats = RpvStats {
        anchors: anchors.len(),
        candidates: candidates.len(),
        completions: done.completions.len(),
        truncated: done.truncated,
        paths: graph.paths.len(),
    };
    (graph, stats)
}
