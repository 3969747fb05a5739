//! Offline partial paths: every simple path of short duration, indexed by
//! the locations it visits and the offset of each visit.

mod index;
mod prune;

pub use index::{PathIndex, DEFAULT_BUCKET_WIDTH};
pub use prune::{prune_paths_data_driven, PruneConfig, PrunedPaths};

use crate::network::{LocationId, RoadNetwork};
use crate::par::par_map;
use crate::Seconds;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PathId(pub u32);

impl PathId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for PathId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P{}", self.0)
    }
}

/// A simple path with visit offsets relative to its start.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PartialPath {
    pub nodes: Vec<LocationId>,
    pub offsets: Vec<Seconds>,
}

impl PartialPath {
    pub fn single(loc: LocationId) -> PartialPath {
        PartialPath { nodes: vec![loc], offsets: vec![0] }
    }

    pub fn start(&self) -> LocationId {
        self.nodes[0]
    }

    pub fn end(&self) -> LocationId {
        *self.nodes.last().expect("paths are non-empty")
    }

    pub fn duration(&self) -> Seconds {
        *self.offsets.last().expect("paths are non-empty")
    }

    pub fn hops(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Position of `loc` in the path, if visited.
    pub fn position(&self, loc: LocationId) -> Option<usize> {
        self.nodes.iter().position(|&n| n == loc)
    }

    pub fn offset_of(&self, loc: LocationId) -> Option<Seconds> {
        self.position(loc).map(|p| self.offsets[p])
    }

    /// Path along shortest-path hops from `from` to `to`.
    pub fn shortest(network: &RoadNetwork, from: LocationId, to: LocationId) -> PartialPath {
        let nodes = network.shortest_path(from, to);
        let offsets = nodes.iter().map(|&n| network.time(from, n) as Seconds).collect();
        PartialPath { nodes, offsets }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PathStoreError {
    NegativeSpan(Seconds),
    /// Enumeration would exceed the path budget; use pruned generation.
    MemoryBudget { limit: usize },
    SegmentMismatch,
}

impl fmt::Display for PathStoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathStoreError::NegativeSpan(t) => write!(f, "path span must be non-negative, got {t}"),
            PathStoreError::MemoryBudget { limit } => {
                write!(f, "more than {limit} partial paths; switch to data-driven pruned generation")
            }
            PathStoreError::SegmentMismatch => write!(f, "segment durations and thresholds differ in length"),
        }
    }
}

impl core::error::Error for PathStoreError {}

/// Paths together with enumeration statistics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Enumeration {
    pub paths: Vec<PartialPath>,
    /// Search-tree nodes visited.
    pub explored: u64,
    /// Largest hop count among the paths.
    pub max_hops: usize,
}

/// Default cap on the number of stored paths.
pub const DEFAULT_PATH_BUDGET: usize = 5_000_000;

/// All simple paths of duration at most `tau` along network edges, including
/// single-node paths. Paths are ordered by start node, then depth-first with
/// neighbours in id order.
pub fn enumerate_paths(network: &RoadNetwork, tau: Seconds, budget: usize) -> Result<Enumeration, PathStoreError> {
    if tau < 0 {
        return Err(PathStoreError::NegativeSpan(tau));
    }
    let starts: Vec<LocationId> = network.locations().collect();
    let per_start = par_map(&starts, |&s| from_start(network, s, tau, budget));
    let mut paths = Vec::new();
    let mut explored = 0;
    for part in per_start {
        let (p, e) = part?;
        explored += e;
        if paths.len() + p.len() > budget {
            return Err(PathStoreError::MemoryBudget { limit: budget });
        }
        paths.extend(p);
    }
    let max_hops = paths.iter().map(PartialPath::hops).max().unwrap_or(0);
    Ok(Enumeration { paths, explored, max_hops })
}

fn from_start(
    network: &RoadNetwork,
    start: LocationId,
    tau: Seconds,
    budget: usize,
) -> Result<(Vec<PartialPath>, u64), PathStoreError> {
    let mut out = Vec::new();
    let mut explored = 0u64;
    let mut nodes = vec![start];
    let mut offsets = vec![0 as Seconds];
    let mut on_path = vec![false; network.len()];
    on_path[start.index()] = true;
    // explicit stack of next-neighbour cursors
    let mut cursor = vec![0usize];
    out.push(PartialPath { nodes: nodes.clone(), offsets: offsets.clone() });
    explored += 1;
    while let Some(top) = cursor.last_mut() {
        let here = *nodes.last().unwrap();
        let edges = network.out_edges(here);
        if *top >= edges.len() {
            cursor.pop();
            let gone = nodes.pop().unwrap();
            offsets.pop();
            on_path[gone.index()] = false;
            continue;
        }
        let (next, t) = edges[*top];
        *top += 1;
        let at = offsets.last().unwrap() + t as Seconds;
        if on_path[next.index()] || at > tau {
            continue;
        }
        nodes.push(next);
        offsets.push(at);
        on_path[next.index()] = true;
        cursor.push(0);
        out.push(PartialPath { nodes: nodes.clone(), offsets: offsets.clone() });
        explored += 1;
        if out.len() > budget {
            return Err(PathStoreError::MemoryBudget { limit: budget });
        }
    }
    Ok((out, explored))
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::RawEdge;
    use alloc::string::ToString;

    fn net(n: usize, edges: &[(usize, usize, u32)]) -> RoadNetwork {
        let names = (0..n).map(|i| i.to_string()).collect();
        let raw: Vec<RawEdge> = edges.iter().map(|&(from, to, travel_time)| RawEdge { from, to, travel_time }).collect();
        RoadNetwork::from_edges(names, &raw, None).unwrap().0
    }

    #[test]
    fn two_nodes() {
        let g = net(2, &[(0, 1, 50), (1, 0, 70)]);
        let e = enumerate_paths(&g, 60, DEFAULT_PATH_BUDGET).unwrap();
        let seqs: Vec<Vec<u32>> = e.paths.iter().map(|p| p.nodes.iter().map(|l| l.0).collect()).collect();
        assert_eq!(seqs, vec![vec![0], vec![0, 1], vec![1]]);
    }

    #[test]
    fn zero_span_is_single_nodes() {
        let g = net(3, &[(0, 1, 5), (1, 2, 5), (2, 0, 5)]);
        let e = enumerate_paths(&g, 0, DEFAULT_PATH_BUDGET).unwrap();
        assert_eq!(e.paths.len(), 3);
        assert!(e.paths.iter().all(|p| p.nodes.len() == 1));
    }

    #[test]
    fn budget_exceeded() {
        let g = net(3, &[(0, 1, 5), (1, 2, 5), (2, 0, 5)]);
        assert_eq!(enumerate_paths(&g, 100, 4).unwrap_err(), PathStoreError::MemoryBudget { limit: 4 });
    }
}
