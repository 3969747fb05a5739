use super::{Anchor, CandidateInfo, CandidateKey, CandidateRequest, RpvConfig, Window};
use crate::network::{LocationId, Request, RoadNetwork};
use crate::par::par_map;
use crate::pathstore::{PartialPath, PathId, PathIndex};
use crate::Seconds;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

/// Per-path bookkeeping before compaction; positions refer to the offline path.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RawCandidate {
    pub requests: Vec<CandidateRequest>,
    pub dropoffs: BTreeMap<LocationId, Window>,
    pub required: BTreeSet<LocationId>,
}

struct Scan<'a> {
    path: &'a PartialPath,
    /// Start of the path relative to `t`.
    base: Seconds,
    /// End of the pickup horizon relative to `t`.
    horizon: Seconds,
}

impl Scan<'_> {
    fn time(&self, pos: usize) -> Seconds {
        self.base + self.path.offsets[pos]
    }

    /// Pickup position of a request waiting at `origin` since `arrival`.
    fn pickup(&self, origin: LocationId, arrival: Seconds, t: Seconds, tau: Seconds) -> Option<usize> {
        let p = self.path.position(origin)?;
        (self.time(p) <= arrival - t + tau).then_some(p)
    }

    /// Files the drop-off: in the prefix if visited in time, otherwise as a
    /// suffix destination unless its deadline falls inside the prefix span.
    fn drop(&self, raw: &mut RawCandidate, after: Option<usize>, d: LocationId, w: Window) -> bool {
        let from = after.map_or(0, |p| p + 1);
        let visited = (from..self.path.nodes.len()).find(|&q| self.path.nodes[q] == d && self.time(q) <= w.ub);
        if visited.is_some() {
            raw.required.insert(d);
            true
        } else if w.ub < self.horizon {
            false
        } else {
            raw.dropoffs.entry(d).and_modify(|x| x.merge(w)).or_insert(w);
            true
        }
    }
}

/// New-request pass over one offline path for one anchor.
pub fn scan_path(
    t: Seconds,
    path: &PartialPath,
    anchor: &Anchor,
    by_origin: &BTreeMap<LocationId, Vec<&Request>>,
    network: &RoadNetwork,
    cfg: &RpvConfig,
) -> RawCandidate {
    let base = anchor.available_at - t;
    let scan = Scan { path, base, horizon: base + cfg.tau };
    let mut raw = RawCandidate::default();
    for (p, loc) in path.nodes.iter().enumerate() {
        let Some(reqs) = by_origin.get(loc) else { continue };
        for r in reqs {
            if scan.pickup(r.origin, r.arrival, t, cfg.tau) != Some(p) {
                continue;
            }
            let w = Window::for_request(r, t, network, cfg.lambda);
            if scan.drop(&mut raw, Some(p), r.destination, w) {
                raw.required.insert(r.origin);
                raw.requests.push(CandidateRequest {
                    request: r.id,
                    destination: r.destination,
                    pickup: Some(p),
                    window: w,
                    committed: false,
                });
            }
        }
    }
    raw
}

/// Keeps only paths that can also serve every request already bound to the
/// anchor's vehicles, adding those requests' stops. Paths without any new
/// request are dropped too.
pub fn get_paths_for_vehicle(
    t: Seconds,
    anchor: &Anchor,
    raw: &mut BTreeMap<PathId, RawCandidate>,
    index: &PathIndex,
    network: &RoadNetwork,
    cfg: &RpvConfig,
) {
    raw.retain(|_, c| !c.requests.is_empty());
    if anchor.commitments.is_empty() {
        return;
    }
    let base = anchor.available_at - t;
    raw.retain(|&id, cand| {
        let path = index.path(id);
        let scan = Scan { path, base, horizon: base + cfg.tau };
        for a in &anchor.commitments {
            let r = &a.request;
            let w = Window::for_request(r, t, network, cfg.lambda);
            let pickup = if a.picked_up {
                None
            } else {
                match scan.pickup(r.origin, r.arrival, t, cfg.tau) {
                    Some(p) => Some(p),
                    None => return false,
                }
            };
            if !scan.drop(cand, pickup, r.destination, w) {
                return false;
            }
            if pickup.is_some() {
                cand.required.insert(r.origin);
            }
            cand.requests.push(CandidateRequest {
                request: r.id,
                destination: r.destination,
                pickup,
                window: w,
                committed: true,
            });
        }
        true
    });
}

/// Matches the batch against offline paths starting at each anchor, keeps
/// paths that pick up at least one new request and can serve the anchor's
/// commitments, and compacts them to their pickup/drop-off nodes.
pub fn process_offline_paths(
    t: Seconds,
    index: &PathIndex,
    network: &RoadNetwork,
    demand: &[Request],
    anchors: &[Anchor],
    cfg: &RpvConfig,
) -> BTreeMap<CandidateKey, CandidateInfo> {
    let mut by_origin: BTreeMap<LocationId, Vec<&Request>> = BTreeMap::new();
    let mut sorted: Vec<&Request> = demand.iter().collect();
    sorted.sort_by_key(|r| r.id);
    for r in sorted {
        by_origin.entry(r.origin).or_default().push(r);
    }
    let ids: Vec<usize> = (0..anchors.len()).collect();
    let per_anchor = par_map(&ids, |&a| {
        let anchor = &anchors[a];
        let mut raw: BTreeMap<PathId, RawCandidate> = BTreeMap::new();
        for &id in index.starting_at(anchor.location) {
            let c = scan_path(t, index.path(id), anchor, &by_origin, network, cfg);
            if !c.requests.is_empty() {
                raw.insert(id, c);
            }
        }
        get_paths_for_vehicle(t, anchor, &mut raw, index, network, cfg);
        compact_all(a, anchor, raw, index, network, t)
    });
    per_anchor.into_iter().flatten().collect()
}

/// Drops nodes that are neither the start nor required, re-times the rest
/// along shortest paths and merges candidates that end up identical.
fn compact_all(
    a: usize,
    anchor: &Anchor,
    raw: BTreeMap<PathId, RawCandidate>,
    index: &PathIndex,
    network: &RoadNetwork,
    t: Seconds,
) -> Vec<(CandidateKey, CandidateInfo)> {
    let base = anchor.available_at - t;
    let mut merged: BTreeMap<Vec<LocationId>, CandidateInfo> = BTreeMap::new();
    for (id, cand) in raw {
        let path = index.path(id);
        let keep: Vec<usize> = (0..path.nodes.len()).filter(|&p| p == 0 || cand.required.contains(&path.nodes[p])).collect();
        let mut prefix: Vec<(LocationId, Seconds)> = Vec::with_capacity(keep.len());
        for &p in &keep {
            let loc = path.nodes[p];
            let time = match prefix.last() {
                None => base,
                Some(&(prev, at)) => at + network.time(prev, loc) as Seconds,
            };
            prefix.push((loc, time));
        }
        let new_pos = |p: usize| keep.binary_search(&p).expect("pickups are kept");
        let requests: Vec<CandidateRequest> = cand
            .requests
            .iter()
            .map(|r| CandidateRequest { pickup: r.pickup.map(new_pos), ..*r })
            .collect();
        let key: Vec<LocationId> = prefix.iter().map(|x| x.0).collect();
        match merged.get_mut(&key) {
            None => {
                merged.insert(key, CandidateInfo { source: id, prefix, requests, dropoffs: cand.dropoffs });
            }
            Some(info) => {
                for r in requests {
                    if !info.requests.iter().any(|x| x.request == r.request) {
                        info.requests.push(r);
                    }
                }
                for (d, w) in cand.dropoffs {
                    info.dropoffs.entry(d).and_modify(|x| x.merge(w)).or_insert(w);
                }
            }
        }
    }
    let mut out: Vec<(CandidateKey, CandidateInfo)> = merged
        .into_values()
        .map(|mut info| {
            info.requests.sort_by_key(|r: &CandidateRequest| r.request);
            ((a, info.source), info)
        })
        .collect();
    out.sort_by_key(|(k, _)| *k);
    out
}

