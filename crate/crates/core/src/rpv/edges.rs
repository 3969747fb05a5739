use super::{
    locate_drop, Anchor, CandidateInfo, CandidateKey, CommitmentStop, Completion, RequestEdge, RpvConfig, RpvGraph,
    ZonePath, ZonePathId,
};
use crate::network::{Request, RequestId};
use crate::par::par_map;
use crate::zoning::Zoning;
use crate::Seconds;
use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

struct Built {
    path: ZonePath,
    edges: Vec<RequestEdge>,
    commitments: Vec<CommitmentStop>,
    load: Vec<u32>,
    vehicles: Vec<crate::fleet::VehicleId>,
}

/// Exact edge check for every completed path: a request gets an edge when
/// the prefix reaches its origin within the wait limit and the path reaches
/// its destination (or its zone) before the delay limit; a vehicle gets an
/// edge when the path starts at its position and serves all its committed
/// requests without exceeding its capacity.
pub fn identify_edges(
    t: Seconds,
    completions: &[Completion],
    candidates: &BTreeMap<CandidateKey, CandidateInfo>,
    anchors: &[Anchor],
    zonings: &[Zoning],
    demand: &[Request],
    cfg: &RpvConfig,
) -> RpvGraph {
    let by_id: BTreeMap<RequestId, &Request> = demand.iter().map(|r| (r.id, r)).collect();
    let built: Vec<Option<Built>> = par_map(completions, |c| {
        let info = &candidates[&c.key];
        let anchor = &anchors[c.key.0];
        let zoning = &zonings[c.zoning];
        let (nodes, times) = c.layout(info);
        let mut edges = Vec::new();
        let mut commitments = Vec::new();
        for r in &info.requests {
            let drop = locate_drop(&nodes, &times, zoning, r.pickup, r.destination, r.window.ub);
            match (r.committed, drop) {
                (true, None) => return None,
                (true, Some(q)) => commitments.push(CommitmentStop { request: r.request, pickup: r.pickup, dropoff: q }),
                (false, Some(q)) => {
                    let p = r.pickup.expect("new requests have a pickup");
                    let fresh = by_id.get(&r.request).is_some_and(|req| times[p] <= req.arrival - t + cfg.tau);
                    if fresh {
                        edges.push(RequestEdge { request: r.request, pickup: p, dropoff: q });
                    }
                }
                (false, None) => {}
            }
        }
        if edges.is_empty() {
            return None;
        }
        let mut load = vec![0u32; nodes.len()];
        for s in &commitments {
            let from = s.pickup.map_or(0, |p| p + 1);
            for l in &mut load[from..=s.dropoff] {
                *l += 1;
            }
        }
        let peak = load.iter().copied().max().unwrap_or(0);
        let vehicles: Vec<_> = anchor.vehicles.iter().filter(|&&(_, cap)| cap >= peak).map(|&(v, _)| v).collect();
        if vehicles.is_empty() {
            return None;
        }
        let path = ZonePath {
            id: ZonePathId(0),
            anchor: c.key.0,
            source: c.key.1,
            nodes,
            times: times.iter().map(|x| x + t).collect(),
            zoning: c.zoning,
            prefix_len: info.prefix.len(),
        };
        Some(Built { path, edges, commitments, load, vehicles })
    });
    let mut g = RpvGraph { t, ..Default::default() };
    for b in built.into_iter().flatten() {
        let mut path = b.path;
        path.id = ZonePathId(g.paths.len() as u32);
        for e in &b.edges {
            g.requests.insert(e.request, *by_id[&e.request]);
        }
        g.paths.push(path);
        g.request_edges.push(b.edges);
        g.commitments.push(b.commitments);
        g.committed_load.push(b.load);
        g.vehicle_edges.push(b.vehicles);
    }
    for a in anchors {
        for c in &a.commitments {
            g.requests.insert(c.request.id, c.request);
        }
        for &(v, cap) in &a.vehicles {
            g.capacity.insert(v, cap);
        }
    }
    g
}
