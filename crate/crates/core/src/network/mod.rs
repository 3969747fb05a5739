//! Road graph, all-pairs travel times and shortest-path next hops, demand
//! traces, and the synthetic grid-city generator.

mod graph;
pub mod synthetic;
mod trace;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub use trace::{DemandTrace, Request, RequestId, TraceError};

/// Dense index of a road-network node (street intersection).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LocationId(pub u32);

impl LocationId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for LocationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NetworkError {
    /// An edge references a node index outside the name table.
    UnknownNode { edge: usize, node: usize },
    /// Travel times must be strictly positive.
    NonPositiveTime { edge: usize },
    /// Nothing left after strongly-connected-component extraction.
    EmptyComponent,
    /// Coordinates supplied for a different number of nodes.
    CoordinateCount { expected: usize, got: usize },
}

impl fmt::Display for NetworkError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NetworkError::UnknownNode { edge, node } => {
                write!(f, "edge {edge} references unknown node {node}")
            }
            NetworkError::NonPositiveTime { edge } => {
                write!(f, "edge {edge} has a non-positive travel time")
            }
            NetworkError::EmptyComponent => write!(f, "network has no strongly connected component"),
            NetworkError::CoordinateCount { expected, got } => {
                write!(f, "expected {expected} coordinates, got {got}")
            }
        }
    }
}

impl core::error::Error for NetworkError {}

/// Raw directed edge between two indices of a name table.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RawEdge {
    pub from: usize,
    pub to: usize,
    pub travel_time: u32,
}

/// What happened to the raw graph while building a [`RoadNetwork`].
#[derive(Clone, Debug, Default)]
pub struct BuildReport {
    /// Raw indices of nodes outside the largest strongly connected component.
    pub dropped: Vec<usize>,
    /// For each raw index: its location in the network, or for dropped nodes
    /// the nearest kept node by travel time in the raw graph (if any).
    pub mapping: Vec<Option<LocationId>>,
}

/// Immutable road network restricted to its largest strongly connected
/// component, with exact all-pairs travel times and next-hop tables.
#[derive(Clone, Debug)]
pub struct RoadNetwork {
    names: Vec<String>,
    coords: Option<Vec<(f64, f64)>>,
    out: Vec<Vec<(LocationId, u32)>>,
    times: Vec<u32>,
    next_hop: Vec<u32>,
}

impl RoadNetwork {
    /// Builds the network from a raw edge list. Parallel edges keep the
    /// fastest time and self loops are ignored.
    pub fn from_edges(
        names: Vec<String>,
        edges: &[RawEdge],
        coords: Option<Vec<(f64, f64)>>,
    ) -> Result<(RoadNetwork, BuildReport), NetworkError> {
        let n = names.len();
        if let Some(c) = &coords {
            if c.len() != n {
                return Err(NetworkError::CoordinateCount { expected: n, got: c.len() });
            }
        }
        let mut raw_out: Vec<Vec<(usize, u32)>> = alloc::vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            if e.from >= n {
                return Err(NetworkError::UnknownNode { edge: i, node: e.from });
            }
            if e.to >= n {
                return Err(NetworkError::UnknownNode { edge: i, node: e.to });
            }
            if e.travel_time == 0 {
                return Err(NetworkError::NonPositiveTime { edge: i });
            }
            if e.from == e.to {
                continue;
            }
            let list = &mut raw_out[e.from];
            match list.iter_mut().find(|(to, _)| *to == e.to) {
                Some(slot) => slot.1 = slot.1.min(e.travel_time),
                None => list.push((e.to, e.travel_time)),
            }
        }
        let keep = graph::largest_scc(&raw_out);
        if keep.is_empty() {
            return Err(NetworkError::EmptyComponent);
        }
        let mut new_index = alloc::vec![None; n];
        for (new, &old) in keep.iter().enumerate() {
            new_index[old] = Some(LocationId(new as u32));
        }
        let mut out: Vec<Vec<(LocationId, u32)>> = Vec::with_capacity(keep.len());
        for &old in &keep {
            let mut list: Vec<(LocationId, u32)> = raw_out[old]
                .iter()
                .filter_map(|&(to, t)| new_index[to].map(|id| (id, t)))
                .collect();
            list.sort();
            out.push(list);
        }
        let kept_names = keep.iter().map(|&i| names[i].clone()).collect();
        let kept_coords = coords.map(|c| keep.iter().map(|&i| c[i]).collect());
        let (times, next_hop) = graph::all_pairs(&out);
        let network = RoadNetwork { names: kept_names, coords: kept_coords, out, times, next_hop };

        let mut report = BuildReport { dropped: Vec::new(), mapping: new_index.clone() };
        for old in 0..n {
            if new_index[old].is_none() {
                report.dropped.push(old);
                report.mapping[old] = graph::nearest_kept(&raw_out, old, &new_index);
            }
        }
        Ok((network, report))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn locations(&self) -> impl ExactSizeIterator<Item = LocationId> + '_ {
        (0..self.names.len() as u32).map(LocationId)
    }

    pub fn name(&self, loc: LocationId) -> &str {
        &self.names[loc.index()]
    }

    pub fn find(&self, name: &str) -> Option<LocationId> {
        self.names.iter().position(|n| n == name).map(|i| LocationId(i as u32))
    }

    pub fn coords(&self) -> Option<&[(f64, f64)]> {
        self.coords.as_deref()
    }

    /// Outgoing road segments, sorted by target.
    pub fn out_edges(&self, loc: LocationId) -> &[(LocationId, u32)] {
        &self.out[loc.index()]
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    pub fn max_out_degree(&self) -> usize {
        self.out.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Shortest travel time between two locations, in seconds.
    #[inline]
    pub fn time(&self, from: LocationId, to: LocationId) -> u32 {
        self.times[from.index() * self.len() + to.index()]
    }

    /// Next node after `from` on the stored shortest path to `to`
    /// (`to` itself when `from == to`).
    #[inline]
    pub fn next_hop(&self, from: LocationId, to: LocationId) -> LocationId {
        LocationId(self.next_hop[from.index() * self.len() + to.index()])
    }

    /// Node sequence of the stored shortest path, both ends included.
    pub fn shortest_path(&self, from: LocationId, to: LocationId) -> Vec<LocationId> {
        let mut path = alloc::vec![from];
        let mut cur = from;
        while cur != to {
            cur = self.next_hop(cur, to);
            path.push(cur);
        }
        path
    }

    /// Cheapest edge time on `from -> to`, if the segment exists.
    pub fn edge_time(&self, from: LocationId, to: LocationId) -> Option<u32> {
        let list = &self.out[from.index()];
        list.binary_search_by_key(&to, |&(t, _)| t).ok().map(|i| list[i].1)
    }
}
