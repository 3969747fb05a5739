//! Instance generators and reference solvers shared by the oracle tests.
//!
//! The references are deliberately naive: exhaustive enumeration, textbook
//! Hungarian, recursive DFS. They share no code with the library beyond
//! its data types.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};
use zac_core::fleet::VehicleId;
use zac_core::future::{Element, FutureSampleSet, Sample, Subelement, SupplyType};
use zac_core::network::{RawEdge, Request, RequestId};
use zac_core::pathstore::PathId;
use zac_core::rpv::{
    CandidateInfo, CandidateRequest, CommitmentStop, PathNode, RequestEdge, RpvGraph, Window, ZonePath, ZonePathId,
};
use zac_core::zoning::{ZoneId, Zoning};
use zac_core::{LocationId, RoadNetwork};

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

pub fn network(n: usize, edges: &[(usize, usize, u32)]) -> RoadNetwork {
    let names = (0..n).map(|i| format!("n{i}")).collect();
    let raw: Vec<RawEdge> = edges.iter().map(|&(from, to, travel_time)| RawEdge { from, to, travel_time }).collect();
    RoadNetwork::from_edges(names, &raw, None).unwrap().0
}

/// Two-way grid with uniform edge time and unit coordinates.
pub fn grid(rows: usize, cols: usize, time: u32) -> RoadNetwork {
    let mut edges = Vec::new();
    let id = |r: usize, c: usize| r * cols + c;
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                edges.push(RawEdge { from: id(r, c), to: id(r, c + 1), travel_time: time });
                edges.push(RawEdge { from: id(r, c + 1), to: id(r, c), travel_time: time });
            }
            if r + 1 < rows {
                edges.push(RawEdge { from: id(r, c), to: id(r + 1, c), travel_time: time });
                edges.push(RawEdge { from: id(r + 1, c), to: id(r, c), travel_time: time });
            }
        }
    }
    let names = (0..rows * cols).map(|i| format!("g{i}")).collect();
    let coords = (0..rows * cols).map(|i| ((i % cols) as f64, (i / cols) as f64)).collect();
    RoadNetwork::from_edges(names, &edges, Some(coords)).unwrap().0
}

/// Directed ring plus random chords: strongly connected by construction.
pub fn random_network(rng: &mut ChaCha8Rng, n: usize, chords: usize, times: std::ops::RangeInclusive<u32>) -> RoadNetwork {
    let mut edges: Vec<(usize, usize, u32)> = (0..n).map(|i| (i, (i + 1) % n, rng.gen_range(times.clone()))).collect();
    for _ in 0..chords {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a != b {
            edges.push((a, b, rng.gen_range(times.clone())));
        }
    }
    network(n, &edges)
}

// ---------------------------------------------------------------------------
// assignment instances

/// Abstract RPV graph: paths are plain position sequences, commitments are
/// drawn per path and the committed load derived from them.
pub fn random_rpv_graph(rng: &mut ChaCha8Rng, max_vehicles: usize, max_requests: usize, max_paths: usize) -> RpvGraph {
    let nv = rng.gen_range(1..=max_vehicles);
    let nr = rng.gen_range(1..=max_requests);
    let np = rng.gen_range(1..=max_paths);
    let mut g = RpvGraph::default();
    for v in 0..nv {
        g.capacity.insert(VehicleId(v as u32), rng.gen_range(1..=3));
    }
    for m in 0..np {
        let len = rng.gen_range(2..=6);
        let nodes = (0..len).map(|k| PathNode::Location(LocationId((m * 10 + k) as u32))).collect();
        let times = (0..len).map(|k| 10 * k as i64).collect();
        g.paths.push(ZonePath {
            id: ZonePathId(m as u32),
            anchor: 0,
            source: PathId(m as u32),
            nodes,
            times,
            zoning: 0,
            prefix_len: len,
        });
        let mut commitments = Vec::new();
        if rng.gen_bool(0.3) {
            let request = RequestId(100 + m as u32);
            if rng.gen_bool(0.5) {
                commitments.push(CommitmentStop { request, pickup: None, dropoff: rng.gen_range(1..len) });
            } else {
                let p = rng.gen_range(0..len - 1);
                commitments.push(CommitmentStop { request, pickup: Some(p), dropoff: rng.gen_range(p + 1..len) });
            }
        }
        let load = (0..len)
            .map(|n| {
                commitments
                    .iter()
                    .filter(|c| match c.pickup {
                        None => n <= c.dropoff,
                        Some(p) => p < n && n <= c.dropoff,
                    })
                    .count() as u32
            })
            .collect();
        g.committed_load.push(load);
        g.commitments.push(commitments);
        let vs: Vec<VehicleId> = (0..nv).filter(|_| rng.gen_bool(0.35)).map(|v| VehicleId(v as u32)).collect();
        g.vehicle_edges.push(vs);
        g.request_edges.push(Vec::new());
    }
    for j in 0..nr {
        let id = RequestId(j as u32);
        let k = rng.gen_range(1..=4.min(np));
        let mut ms: Vec<usize> = (0..np).collect();
        ms.shuffle(rng);
        for &m in &ms[..k] {
            let len = g.paths[m].len();
            let pickup = rng.gen_range(0..len - 1);
            let dropoff = rng.gen_range(pickup + 1..len);
            g.request_edges[m].push(RequestEdge { request: id, pickup, dropoff });
        }
        g.requests.insert(id, Request { id, origin: LocationId(0), destination: LocationId(1), arrival: 0 });
    }
    g
}

fn seats(g: &RpvGraph, v: VehicleId, m: usize, n: usize) -> u32 {
    g.capacity[&v].saturating_sub(g.committed_load[m][n])
}

/// Paths that carry riders need distinct vehicles with room at every position.
fn vehicles_fit(g: &RpvGraph, used: &[(usize, Vec<usize>)], k: usize, taken: &mut Vec<VehicleId>) -> bool {
    if k == used.len() {
        return true;
    }
    let (m, riders) = &used[k];
    let path = &g.paths[*m];
    for &v in &g.vehicle_edges[*m] {
        if taken.contains(&v) {
            continue;
        }
        let ok = (0..path.len()).all(|n| {
            let load = riders
                .iter()
                .filter(|&&e| {
                    let edge = &g.request_edges[*m][e];
                    edge.pickup < n && n <= edge.dropoff
                })
                .count() as u32;
            load <= seats(g, v, *m, n)
        });
        if ok {
            taken.push(v);
            if vehicles_fit(g, used, k + 1, taken) {
                return true;
            }
            taken.pop();
        }
    }
    false
}

/// Best total weight over every way of placing each request on one of its
/// paths (or nowhere), keeping placements a vehicle matching can carry.
pub fn brute_force_zac(g: &RpvGraph) -> f64 {
    let mut options: BTreeMap<RequestId, Vec<(usize, usize)>> = BTreeMap::new();
    for (m, edges) in g.request_edges.iter().enumerate() {
        for (e, edge) in edges.iter().enumerate() {
            options.entry(edge.request).or_default().push((m, e));
        }
    }
    let options: Vec<(RequestId, Vec<(usize, usize)>)> = options.into_iter().collect();
    let mut best = 0.0;
    let mut chosen: Vec<Option<(usize, usize)>> = vec![None; options.len()];
    fn rec(
        g: &RpvGraph,
        options: &[(RequestId, Vec<(usize, usize)>)],
        j: usize,
        chosen: &mut Vec<Option<(usize, usize)>>,
        value: f64,
        best: &mut f64,
    ) {
        let rest: f64 = options[j..].iter().map(|(r, _)| g.weight(*r)).sum();
        if value + rest <= *best {
            return;
        }
        if j == options.len() {
            let mut used: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for (m, e) in chosen.iter().flatten() {
                used.entry(*m).or_default().push(*e);
            }
            let used: Vec<(usize, Vec<usize>)> = used.into_iter().collect();
            if vehicles_fit(g, &used, 0, &mut Vec::new()) {
                *best = value;
            }
            return;
        }
        for &opt in &options[j].1 {
            chosen[j] = Some(opt);
            rec(g, options, j + 1, chosen, value + g.weight(options[j].0), best);
        }
        chosen[j] = None;
        rec(g, options, j + 1, chosen, value, best);
    }
    rec(g, &options, 0, &mut chosen, 0.0, &mut best);
    best
}

// ---------------------------------------------------------------------------
// matching

/// Minimum-cost perfect assignment on a square matrix (potentials method).
pub fn hungarian(cost: &[Vec<i64>]) -> (i64, Vec<usize>) {
    let n = cost.len();
    if n == 0 {
        return (0, Vec::new());
    }
    const INF: i64 = i64::MAX / 4;
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![INF; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = INF;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut row_to_col = vec![0; n];
    for j in 1..=n {
        if p[j] > 0 {
            row_to_col[p[j] - 1] = j - 1;
        }
    }
    let total = (0..n).map(|i| cost[i][row_to_col[i]]).sum();
    (total, row_to_col)
}

/// Maximum-weight matching of a rectangular non-negative weight matrix,
/// rows and columns may stay unmatched.
pub fn max_weight_matching(w: &[Vec<i64>]) -> i64 {
    let rows = w.len();
    let cols = w.first().map_or(0, |r| r.len());
    let n = rows.max(cols);
    let cost: Vec<Vec<i64>> =
        (0..n).map(|i| (0..n).map(|j| if i < rows && j < cols { -w[i][j] } else { 0 }).collect()).collect();
    -hungarian(&cost).0
}

// ---------------------------------------------------------------------------
// future demand

/// Reference edge rule between a supply type and an element.
pub fn reaches(set: &FutureSampleSet, ty: SupplyType, el: &Element) -> bool {
    let Some(list) = set.near.get(&el.origin) else { return false };
    let Some(&(_, tt)) = list.iter().find(|(z, _)| *z == ty.0) else { return false };
    let late = ((ty.1 - el.epoch) * set.delta).max(0);
    late + tt as i64 <= set.tau
}

/// Best matched weight of one sample given integer supply per type,
/// by expanding each type into unit copies.
pub fn recourse(set: &FutureSampleSet, k: usize, types: &[SupplyType], supply: &[f64]) -> f64 {
    let sample = &set.samples[k];
    let mut rows = Vec::new();
    for (i, &ty) in types.iter().enumerate() {
        for _ in 0..supply[i].round() as usize {
            rows.push(
                sample
                    .subelements
                    .iter()
                    .map(|s| if reaches(set, ty, &sample.elements[s.element]) { s.weight as i64 } else { 0 })
                    .collect::<Vec<i64>>(),
            );
        }
    }
    max_weight_matching(&rows) as f64
}

/// Samples over three zones and three epochs after `current`.
pub fn random_samples(rng: &mut ChaCha8Rng, samples: usize, max_elements: usize, kappa: u32) -> FutureSampleSet {
    let current = 5;
    let mut near = BTreeMap::new();
    for o in 0..3u32 {
        let mut list: Vec<(ZoneId, u32)> = Vec::new();
        for z in 0..3u32 {
            if z == o {
                list.push((ZoneId(z), 0));
            } else if rng.gen_bool(0.5) {
                list.push((ZoneId(z), rng.gen_range(30..=120)));
            }
        }
        near.insert(ZoneId(o), list);
    }
    let mut out = Vec::new();
    for _ in 0..samples {
        let mut counts: BTreeMap<(ZoneId, ZoneId, i64), u32> = BTreeMap::new();
        for _ in 0..rng.gen_range(0..=max_elements) {
            let key = (ZoneId(rng.gen_range(0..3)), ZoneId(rng.gen_range(0..3)), current + rng.gen_range(1..=3));
            *counts.entry(key).or_default() += rng.gen_range(1..=6);
        }
        let mut s = Sample::default();
        for ((origin, destination, epoch), count) in counts {
            let element = s.elements.len();
            s.elements.push(Element { origin, destination, epoch, count });
            let full = count / kappa;
            for r in 0..count.div_ceil(kappa) {
                let weight = if r < full { kappa } else { count % kappa } as f64;
                s.subelements.push(Subelement { element, index: r, weight });
            }
        }
        out.push(s);
    }
    FutureSampleSet { current_epoch: current, lookahead_epochs: 3, delta: 60, tau: 120, kappa, samples: out, near }
}

pub fn random_path_types(rng: &mut ChaCha8Rng, g: &RpvGraph, current: i64) -> Vec<Option<SupplyType>> {
    g.paths
        .iter()
        .map(|_| rng.gen_bool(0.85).then(|| (ZoneId(rng.gen_range(0..3)), current + rng.gen_range(1..=3))))
        .collect()
}

/// Exhaustive two-stage optimum: every vehicle-to-path choice, the best
/// riders for it, plus the averaged matching of the supply it leaves.
pub fn brute_force_future(g: &RpvGraph, set: &FutureSampleSet, path_type: &[Option<SupplyType>]) -> f64 {
    let vehicles: Vec<VehicleId> = g.capacity.keys().copied().collect();
    let mut types: Vec<SupplyType> = path_type.iter().flatten().copied().collect();
    types.sort();
    types.dedup();
    let mut best = f64::NEG_INFINITY;
    let mut choice: Vec<Option<usize>> = vec![None; vehicles.len()];
    fn rec(
        g: &RpvGraph,
        set: &FutureSampleSet,
        path_type: &[Option<SupplyType>],
        types: &[SupplyType],
        vehicles: &[VehicleId],
        i: usize,
        choice: &mut Vec<Option<usize>>,
        best: &mut f64,
    ) {
        if i == vehicles.len() {
            let mut supply = vec![0.0; types.len()];
            for m in choice.iter().flatten() {
                if let Some(ty) = path_type[*m] {
                    supply[types.binary_search(&ty).unwrap()] += 1.0;
                }
            }
            let future: f64 = if set.samples.is_empty() {
                0.0
            } else {
                (0..set.samples.len()).map(|k| recourse(set, k, types, &supply)).sum::<f64>() / set.samples.len() as f64
            };
            let mut sub = g.clone();
            for m in 0..sub.paths.len() {
                sub.vehicle_edges[m] = match choice.iter().position(|c| *c == Some(m)) {
                    Some(v) => vec![vehicles[v]],
                    None => Vec::new(),
                };
            }
            let today = brute_force_zac(&sub);
            if today + future > *best {
                *best = today + future;
            }
            return;
        }
        for m in 0..g.paths.len() {
            if g.vehicle_edges[m].contains(&vehicles[i]) && !choice.contains(&Some(m)) {
                choice[i] = Some(m);
                rec(g, set, path_type, types, vehicles, i + 1, choice, best);
            }
        }
        choice[i] = None;
        rec(g, set, path_type, types, vehicles, i + 1, choice, best);
    }
    rec(g, set, path_type, &types, &vehicles, 0, &mut choice, &mut best);
    best
}

// ---------------------------------------------------------------------------
// paths

/// Every simple path from every node with total time at most `tau`.
pub fn naive_paths(net: &RoadNetwork, tau: i64) -> BTreeSet<Vec<LocationId>> {
    fn walk(net: &RoadNetwork, tau: i64, path: &mut Vec<LocationId>, spent: i64, out: &mut BTreeSet<Vec<LocationId>>) {
        out.insert(path.clone());
        let here = *path.last().unwrap();
        for &(next, t) in net.out_edges(here) {
            if !path.contains(&next) && spent + t as i64 <= tau {
                path.push(next);
                walk(net, tau, path, spent + t as i64, out);
                path.pop();
            }
        }
    }
    let mut out = BTreeSet::new();
    for l in net.locations() {
        walk(net, tau, &mut vec![l], 0, &mut out);
    }
    out
}

// ---------------------------------------------------------------------------
// completion

/// A compacted candidate on `net` with up to `max_dest` distinct
/// destinations; the prefix is a shortest-path walk through random pickups.
pub fn random_candidate(rng: &mut ChaCha8Rng, net: &RoadNetwork, max_dest: usize) -> CandidateInfo {
    let n = net.len() as u32;
    let start = LocationId(rng.gen_range(0..n));
    let mut prefix = vec![(start, 0i64)];
    for _ in 0..rng.gen_range(0..=2) {
        let (last, at) = *prefix.last().unwrap();
        let next = LocationId(rng.gen_range(0..n));
        if prefix.iter().any(|&(l, _)| l == next) {
            continue;
        }
        prefix.push((next, at + net.time(last, next) as i64));
    }
    let mut dests: Vec<LocationId> = Vec::new();
    let want = rng.gen_range(1..=max_dest);
    while dests.len() < want {
        let d = LocationId(rng.gen_range(0..n));
        if !prefix.iter().any(|&(l, _)| l == d) && !dests.contains(&d) {
            dests.push(d);
        }
    }
    let mut requests = Vec::new();
    let mut dropoffs: BTreeMap<LocationId, Window> = BTreeMap::new();
    let mut id = 0;
    for &d in &dests {
        for _ in 0..rng.gen_range(1..=2) {
            let p = rng.gen_range(0..prefix.len());
            let lb = prefix[p].1 + net.time(prefix[p].0, d) as i64;
            let window = Window { lb, ub: lb + rng.gen_range(0..=240) };
            dropoffs
                .entry(d)
                .and_modify(|w| {
                    w.lb = w.lb.min(window.lb);
                    w.ub = w.ub.max(window.ub);
                })
                .or_insert(window);
            requests.push(CandidateRequest {
                request: RequestId(id),
                destination: d,
                pickup: Some(p),
                window,
                committed: id == 0 && rng.gen_bool(0.2),
            });
            id += 1;
        }
    }
    CandidateInfo { source: PathId(0), prefix, requests, dropoffs }
}

/// Every maximal feasible visiting order of the destinations (singleton
/// zones), kept when it serves all committed requests and something new,
/// then reduced to the non-dominated served sets.
pub fn permutation_completions(net: &RoadNetwork, info: &CandidateInfo, zoning: &Zoning) -> BTreeSet<(Vec<ZoneId>, Vec<RequestId>)> {
    let dests: Vec<(LocationId, Window)> = info.dropoffs.iter().map(|(&d, &w)| (d, w)).collect();
    let (end, at) = *info.prefix.last().unwrap();
    let mut orders: Vec<Vec<(LocationId, i64)>> = Vec::new();
    fn extend(
        net: &RoadNetwork,
        dests: &[(LocationId, Window)],
        from: LocationId,
        at: i64,
        seq: &mut Vec<(LocationId, i64)>,
        out: &mut Vec<Vec<(LocationId, i64)>>,
    ) {
        let mut maximal = true;
        for &(d, w) in dests {
            if seq.iter().any(|&(l, _)| l == d) {
                continue;
            }
            let arrive = at + net.time(from, d) as i64;
            if arrive > w.ub {
                continue;
            }
            maximal = false;
            seq.push((d, arrive));
            extend(net, dests, d, arrive, seq, out);
            seq.pop();
        }
        if maximal {
            out.push(seq.clone());
        }
    }
    extend(net, &dests, end, at, &mut Vec::new(), &mut orders);

    let mut found: Vec<(Vec<ZoneId>, Vec<RequestId>, i64)> = Vec::new();
    for order in orders {
        let mut served = Vec::new();
        let mut ok = true;
        let mut fresh = false;
        for r in &info.requests {
            let p = r.pickup.unwrap();
            let in_prefix = info.prefix[p + 1..].iter().find(|&&(l, _)| l == r.destination).map(|&(_, t)| t);
            let in_suffix = order.iter().find(|&&(l, _)| l == r.destination).map(|&(_, t)| t);
            let hit = in_prefix.or(in_suffix).is_some_and(|t| t <= r.window.ub);
            if hit {
                served.push(r.request);
                fresh |= !r.committed;
            } else if r.committed {
                ok = false;
            }
        }
        if ok && fresh {
            served.sort();
            let finish = order.last().map_or(at, |x| x.1);
            found.push((order.iter().map(|&(l, _)| zoning.zone(l)).collect(), served, finish));
        }
    }
    let mut out = BTreeSet::new();
    for (i, (zones, served, finish)) in found.iter().enumerate() {
        let set: BTreeSet<_> = served.iter().collect();
        let beaten = found.iter().enumerate().any(|(j, (oz, os, of))| {
            let other: BTreeSet<_> = os.iter().collect();
            if i == j || !set.is_subset(&other) {
                return false;
            }
            other.len() > set.len() || (*of, oz) < (*finish, zones)
        });
        if !beaten {
            out.insert((zones.clone(), served.clone()));
        }
    }
    out
}
