use super::{enumerate_paths, PartialPath, PathStoreError};
use crate::network::{LocationId, RoadNetwork, Request};
use crate::Seconds;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

/// Data-driven pruning: the span is cut into segments, each segment path is
/// scored against historical demand, and surviving segments are chained.
#[derive(Clone, Debug)]
pub struct PruneConfig {
    pub segments: Vec<Seconds>,
    /// Minimum score per segment, in historical requests per minute.
    pub thresholds: Vec<f64>,
    pub history: Vec<Request>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrunedPaths {
    pub paths: Vec<PartialPath>,
    /// Marks paths added only because a reachable pair had no kept path.
    pub fallback: Vec<bool>,
    /// Every segment was pruned (or there was no history), so only the
    /// shortest-path fallback remains.
    pub fallback_only: bool,
}

/// Origins per minute of history landing on `path`'s nodes.
pub fn segment_score(path: &PartialPath, origins: &BTreeMap<LocationId, u64>, minutes: f64) -> f64 {
    let hits: u64 = path.nodes.iter().map(|n| origins.get(n).copied().unwrap_or(0)).sum();
    hits as f64 / minutes
}

pub fn prune_paths_data_driven(
    network: &RoadNetwork,
    cfg: &PruneConfig,
    budget: usize,
) -> Result<PrunedPaths, PathStoreError> {
    if cfg.segments.len() != cfg.thresholds.len() || cfg.segments.is_empty() {
        return Err(PathStoreError::SegmentMismatch);
    }
    if let Some(&bad) = cfg.segments.iter().find(|&&s| s < 0) {
        return Err(PathStoreError::NegativeSpan(bad));
    }
    let tau: Seconds = cfg.segments.iter().sum();
    let mut origins: BTreeMap<LocationId, u64> = BTreeMap::new();
    for r in &cfg.history {
        *origins.entry(r.origin).or_default() += 1;
    }
    let (first, last) = match (cfg.history.iter().map(|r| r.arrival).min(), cfg.history.iter().map(|r| r.arrival).max()) {
        (Some(a), Some(b)) => (a, b),
        _ => (0, 0),
    };
    let minutes = ((last - first) as f64 / 60.0).max(1.0);

    let mut chained: Vec<PartialPath> = Vec::new();
    if !cfg.history.is_empty() {
        let mut kept_per_segment = Vec::new();
        for (&span, &gamma) in cfg.segments.iter().zip(&cfg.thresholds) {
            let all = enumerate_paths(network, span, budget)?.paths;
            let mut by_start: BTreeMap<LocationId, Vec<PartialPath>> = BTreeMap::new();
            for p in all {
                if segment_score(&p, &origins, minutes) >= gamma {
                    by_start.entry(p.start()).or_default().push(p);
                }
            }
            kept_per_segment.push(by_start);
        }
        chained = kept_per_segment[0].values().flatten().cloned().collect();
        for next in &kept_per_segment[1..] {
            let mut grown = Vec::new();
            for p in &chained {
                let Some(tails) = next.get(&p.end()) else { continue };
                for tail in tails {
                    if tail.nodes[1..].iter().any(|n| p.nodes.contains(n)) {
                        continue;
                    }
                    let mut q = p.clone();
                    let base = p.duration();
                    q.nodes.extend_from_slice(&tail.nodes[1..]);
                    q.offsets.extend(tail.offsets[1..].iter().map(|o| o + base));
                    grown.push(q);
                    if grown.len() > budget {
                        return Err(PathStoreError::MemoryBudget { limit: budget });
                    }
                }
            }
            chained = grown;
        }
        chained.sort();
        chained.dedup();
    }
    let fallback_only = chained.is_empty();

    // reachable pairs without a kept path get their shortest path
    let mut seen: BTreeSet<PartialPath> = chained.iter().cloned().collect();
    let mut covered: BTreeSet<(LocationId, LocationId)> = BTreeSet::new();
    for p in &chained {
        for &n in &p.nodes {
            covered.insert((p.start(), n));
        }
    }
    let mut fallback = vec![false; chained.len()];
    let mut paths = chained;
    for a in network.locations() {
        for b in network.locations() {
            if network.time(a, b) as Seconds > tau || covered.contains(&(a, b)) {
                continue;
            }
            let sp = PartialPath::shortest(network, a, b);
            for &n in &sp.nodes {
                covered.insert((a, n));
            }
            if seen.insert(sp.clone()) {
                paths.push(sp);
                fallback.push(true);
            }
        }
    }
    Ok(PrunedPaths { paths, fallback, fallback_only })
}
