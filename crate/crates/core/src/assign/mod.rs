//! Batch assignment on the RPV graph, rebalancing of idle vehicles, and a
//! greedy insertion baseline.

mod greedy;
mod rebalance;

pub use greedy::{greedy_insertion_baseline, GreedyOutcome};
pub use rebalance::{rebalance, RebalancePlan};

use crate::budget::{Deadline, Share};
use crate::fleet::{Stop, StopKind, VehicleId};
use crate::network::{LocationId, RequestId, RoadNetwork};
use crate::rpv::{PathNode, RpvGraph, ZonePathId};
use crate::solver::{self, Direction, Model, Sense, Solution, Status, VarId};
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[derive(Clone, Debug, PartialEq)]
pub struct AssignmentSolution {
    pub request_path: BTreeMap<RequestId, ZonePathId>,
    pub vehicle_path: BTreeMap<VehicleId, ZonePathId>,
    /// Weighted number of requests served (plus the future value, for the
    /// two-stage solvers).
    pub objective: f64,
    pub status: Status,
    pub nodes: u64,
}

impl AssignmentSolution {
    pub fn empty() -> AssignmentSolution {
        AssignmentSolution {
            request_path: BTreeMap::new(),
            vehicle_path: BTreeMap::new(),
            objective: 0.0,
            status: Status::Optimal,
            nodes: 0,
        }
    }

    pub fn served(&self) -> usize {
        self.request_path.len()
    }

    /// Request to the vehicle riding its path.
    pub fn request_vehicle(&self) -> BTreeMap<RequestId, VehicleId> {
        let by_path: BTreeMap<ZonePathId, VehicleId> = self.vehicle_path.iter().map(|(&v, &m)| (m, v)).collect();
        self.request_path.iter().filter_map(|(&r, m)| by_path.get(m).map(|&v| (r, v))).collect()
    }

    pub fn timed_out(&self) -> bool {
        self.status == Status::FeasibleTimeout || self.status == Status::Timeout
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct XVar {
    pub request: RequestId,
    pub path: ZonePathId,
    pub edge: usize,
    pub var: VarId,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct YVar {
    pub vehicle: VehicleId,
    pub path: ZonePathId,
    pub var: VarId,
}

/// The assignment program over a subset of paths.
#[derive(Clone, Debug)]
pub struct ZacModel {
    pub model: Model,
    pub x: Vec<XVar>,
    pub y: Vec<YVar>,
}

/// Capacity rows of one path worth keeping: positions up to one past the
/// last pickup (load only falls afterwards), minus rows another row implies.
fn capacity_rows(graph: &RpvGraph, m: usize) -> Vec<usize> {
    let path = &graph.paths[m];
    let edges = &graph.request_edges[m];
    let last_pickup = edges
        .iter()
        .map(|e| e.pickup)
        .chain(graph.commitments[m].iter().filter_map(|c| c.pickup))
        .max()
        .unwrap_or(0);
    let top = (last_pickup + 1).min(path.len() - 1);
    let rows: Vec<(usize, BTreeSet<usize>, Vec<u32>)> = (1..=top)
        .map(|n| {
            let on: BTreeSet<usize> = (0..edges.len()).filter(|&k| graph.onboard(&edges[k], n)).collect();
            let seats = graph.vehicle_edges[m].iter().map(|&v| graph.free_seats(v, path.id, n)).collect();
            (n, on, seats)
        })
        .filter(|(_, on, _)| !on.is_empty())
        .collect();
    let implies = |a: &(usize, BTreeSet<usize>, Vec<u32>), b: &(usize, BTreeSet<usize>, Vec<u32>)| {
        b.1.is_subset(&a.1) && a.2.iter().zip(&b.2).all(|(x, y)| x <= y)
    };
    let mut keep = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        let redundant = rows.iter().enumerate().any(|(j, o)| {
            j != i && implies(o, r) && (!implies(r, o) || j < i)
        });
        if !redundant {
            keep.push(r.0);
        }
    }
    keep
}

/// Builds the assignment program restricted to `paths`.
pub fn build_zac_model(graph: &RpvGraph, paths: &[usize]) -> ZacModel {
    let mut model = Model::new(Direction::Maximize);
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut by_request: BTreeMap<RequestId, Vec<VarId>> = BTreeMap::new();
    let mut by_vehicle: BTreeMap<VehicleId, Vec<VarId>> = BTreeMap::new();
    for &m in paths {
        let id = graph.paths[m].id;
        let ys: Vec<VarId> = graph.vehicle_edges[m]
            .iter()
            .map(|&v| {
                let var = model.add_binary(format!("y{}_{}", v.0, m), 0.0);
                model.set_priority(var, 1);
                y.push(YVar { vehicle: v, path: id, var });
                by_vehicle.entry(v).or_default().push(var);
                var
            })
            .collect();
        let xs: Vec<VarId> = graph.request_edges[m]
            .iter()
            .enumerate()
            .map(|(k, e)| {
                let var = model.add_binary(format!("x{}_{}", e.request.0, m), graph.weight(e.request));
                x.push(XVar { request: e.request, path: id, edge: k, var });
                by_request.entry(e.request).or_default().push(var);
                var
            })
            .collect();
        if ys.len() > 1 {
            model.add_row(format!("p{m}"), ys.iter().map(|&v| (v, 1.0)).collect(), Sense::Le, 1.0);
        }
        for n in capacity_rows(graph, m) {
            let mut coefs: Vec<(VarId, f64)> = Vec::new();
            for (k, e) in graph.request_edges[m].iter().enumerate() {
                if graph.onboard(e, n) {
                    coefs.push((xs[k], 1.0));
                }
            }
            for (i, &v) in graph.vehicle_edges[m].iter().enumerate() {
                coefs.push((ys[i], -(graph.free_seats(v, id, n) as f64)));
            }
            model.add_row(format!("c{m}_{n}"), coefs, Sense::Le, 0.0);
        }
    }
    for (r, vars) in &by_request {
        if vars.len() > 1 {
            model.add_row(format!("r{}", r.0), vars.iter().map(|&v| (v, 1.0)).collect(), Sense::Le, 1.0);
        }
    }
    for (v, vars) in &by_vehicle {
        if vars.len() > 1 {
            model.add_row(format!("v{}", v.0), vars.iter().map(|&x| (x, 1.0)).collect(), Sense::Le, 1.0);
        }
    }
    ZacModel { model, x, y }
}

impl ZacModel {
    /// Reads the chosen edges out of a solution.
    pub fn extract(&self, sol: &Solution, out: &mut AssignmentSolution) {
        if !sol.status.has_solution() {
            return;
        }
        for xv in &self.x {
            if sol.int_value(xv.var) == 1 {
                out.request_path.insert(xv.request, xv.path);
            }
        }
        for yv in &self.y {
            if sol.int_value(yv.var) == 1 {
                out.vehicle_path.insert(yv.vehicle, yv.path);
            }
        }
    }
}

/// Groups paths into independent blocks: two paths share a block when they
/// share a request or a vehicle.
pub fn components(graph: &RpvGraph) -> Vec<Vec<usize>> {
    let n = graph.paths.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut a: usize) -> usize {
        while p[a] != a {
            p[a] = p[p[a]];
            a = p[a];
        }
        a
    }
    let mut owner_r: BTreeMap<RequestId, usize> = BTreeMap::new();
    let mut owner_v: BTreeMap<VehicleId, usize> = BTreeMap::new();
    for m in 0..n {
        let link = |other: usize, parent: &mut Vec<usize>| {
            let (a, b) = (find(parent, m), find(parent, other));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        };
        for e in &graph.request_edges[m] {
            let o = *owner_r.entry(e.request).or_insert(m);
            link(o, &mut parent);
        }
        for &v in &graph.vehicle_edges[m] {
            let o = *owner_v.entry(v).or_insert(m);
            link(o, &mut parent);
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for m in 0..n {
        let root = find(&mut parent, m);
        groups.entry(root).or_default().push(m);
    }
    groups.into_values().collect()
}

/// A feasible point for `zm`: paths with the most request edges first, each
/// taking its first free vehicle and then every request that still fits.
pub fn greedy_start(graph: &RpvGraph, zm: &ZacModel) -> Vec<f64> {
    let mut values = vec![0.0; zm.model.num_vars()];
    let mut xs: BTreeMap<ZonePathId, Vec<&XVar>> = BTreeMap::new();
    let mut ys: BTreeMap<ZonePathId, Vec<&YVar>> = BTreeMap::new();
    for xv in &zm.x {
        xs.entry(xv.path).or_default().push(xv);
    }
    for yv in &zm.y {
        ys.entry(yv.path).or_default().push(yv);
    }
    let mut order: Vec<ZonePathId> = ys.keys().copied().collect();
    order.sort_by_key(|m| (core::cmp::Reverse(xs.get(m).map_or(0, Vec::len)), *m));
    let mut used_v: BTreeSet<VehicleId> = BTreeSet::new();
    let mut used_r: BTreeSet<RequestId> = BTreeSet::new();
    for m in order {
        let Some(yv) = ys[&m].iter().find(|y| !used_v.contains(&y.vehicle)) else { continue };
        let path = &graph.paths[m.index()];
        let edges = &graph.request_edges[m.index()];
        let mut load = vec![0u32; path.len()];
        let seats: Vec<u32> = (0..path.len()).map(|n| graph.free_seats(yv.vehicle, m, n)).collect();
        let mut took = Vec::new();
        for xv in xs.get(&m).into_iter().flatten() {
            if used_r.contains(&xv.request) {
                continue;
            }
            let e = &edges[xv.edge];
            if (0..path.len()).any(|n| graph.onboard(e, n) && load[n] + 1 > seats[n]) {
                continue;
            }
            for (n, l) in load.iter_mut().enumerate() {
                if graph.onboard(e, n) {
                    *l += 1;
                }
            }
            took.push(*xv);
        }
        if took.is_empty() {
            continue;
        }
        used_v.insert(yv.vehicle);
        values[yv.var.0] = 1.0;
        for xv in took {
            used_r.insert(xv.request);
            values[xv.var.0] = 1.0;
        }
    }
    values
}

/// One independent block as solved by [`solve_zac_blocks`].
#[derive(Clone, Debug, PartialEq)]
pub struct BlockResult {
    pub paths: Vec<usize>,
    /// Weight served inside the block.
    pub value: f64,
    /// Whether `value` is proven optimal for the block.
    pub optimal: bool,
}

/// Maximises the weighted number of served requests. Independent blocks
/// are solved one after another under the shared deadline; a block that
/// runs out of time contributes its incumbent (or nothing).
pub fn solve_zac<D: Deadline>(graph: &RpvGraph, deadline: &D) -> AssignmentSolution {
    solve_zac_blocks(graph, deadline).0
}

/// [`solve_zac`] together with the per-block outcome.
pub fn solve_zac_blocks<D: Deadline>(graph: &RpvGraph, deadline: &D) -> (AssignmentSolution, Vec<BlockResult>) {
    let mut out = AssignmentSolution::empty();
    let mut blocks = components(graph);
    // small blocks first; each takes a share of what is left in proportion
    // to its size, and unused time rolls over to the larger ones
    blocks.sort_by_key(|b| (b.len(), b[0]));
    let mut left: usize = blocks.iter().map(Vec::len).sum();
    let mut results = Vec::with_capacity(blocks.len());
    for block in blocks {
        let share = Share::new(deadline, block.len() as f64 / left as f64);
        left -= block.len();
        let zm = build_zac_model(graph, &block);
        let start = greedy_start(graph, &zm);
        let sol = solver::solve_from(&zm.model, &share, start);
        out.nodes += sol.nodes;
        let optimal = match sol.status {
            Status::Optimal => true,
            Status::FeasibleTimeout | Status::Timeout => {
                out.status = Status::FeasibleTimeout;
                false
            }
            Status::Infeasible | Status::Unbounded => unreachable!("the empty assignment is always feasible"),
        };
        let value = if sol.status.has_solution() { sol.objective } else { 0.0 };
        zm.extract(&sol, &mut out);
        results.push(BlockResult { paths: block, value, optimal });
    }
    out.objective = out.request_path.keys().map(|&r| graph.weight(r)).sum();
    (out, results)
}

/// Re-derives the assignment constraints from the graph and checks the
/// solution against them.
pub fn verify_assignment(graph: &RpvGraph, sol: &AssignmentSolution) -> Result<(), String> {
    let mut riders: BTreeMap<ZonePathId, Vec<RequestId>> = BTreeMap::new();
    for (&r, &m) in &sol.request_path {
        if !graph.request_edges[m.index()].iter().any(|e| e.request == r) {
            return Err(format!("{r} has no edge to {m}"));
        }
        riders.entry(m).or_default().push(r);
    }
    let mut taken: BTreeMap<ZonePathId, VehicleId> = BTreeMap::new();
    for (&v, &m) in &sol.vehicle_path {
        if !graph.vehicle_edges[m.index()].contains(&v) {
            return Err(format!("{v} has no edge to {m}"));
        }
        if let Some(o) = taken.insert(m, v) {
            return Err(format!("{m} taken by both {o} and {v}"));
        }
    }
    for (m, rs) in &riders {
        let path = &graph.paths[m.index()];
        for n in 0..path.len() {
            let load = graph.request_edges[m.index()].iter().filter(|e| rs.contains(&e.request) && graph.onboard(e, n)).count();
            let seats = taken.get(m).map_or(0, |&v| graph.free_seats(v, *m, n));
            if load as u32 > seats {
                return Err(format!("{m} position {n}: load {load} over {seats} seats"));
            }
        }
    }
    Ok(())
}

/// Stops for a vehicle taking path `m` with the given new riders: prefix
/// stops in path order (drop-offs before pickups at a node), then each
/// zone's drop-offs in nearest-neighbour order.
pub fn plan_route(graph: &RpvGraph, network: &RoadNetwork, m: ZonePathId, riders: &[RequestId]) -> Vec<Stop> {
    let path = &graph.paths[m.index()];
    let mut drops: Vec<Vec<(RequestId, LocationId)>> = vec![Vec::new(); path.len()];
    let mut picks: Vec<Vec<(RequestId, LocationId)>> = vec![Vec::new(); path.len()];
    for e in &graph.request_edges[m.index()] {
        if riders.contains(&e.request) {
            let r = &graph.requests[&e.request];
            picks[e.pickup].push((r.id, r.origin));
            drops[e.dropoff].push((r.id, r.destination));
        }
    }
    for c in &graph.commitments[m.index()] {
        let r = &graph.requests[&c.request];
        if let Some(p) = c.pickup {
            picks[p].push((r.id, r.origin));
        }
        drops[c.dropoff].push((r.id, r.destination));
    }
    let mut stops = Vec::new();
    let mut here = path.start();
    for n in 0..path.len() {
        let mut ds = core::mem::take(&mut drops[n]);
        ds.sort();
        match path.nodes[n] {
            PathNode::Location(l) => {
                for (r, _) in ds {
                    stops.push(Stop { location: l, kind: StopKind::Dropoff, request: r });
                }
                let mut ps = core::mem::take(&mut picks[n]);
                ps.sort();
                for (r, _) in ps {
                    stops.push(Stop { location: l, kind: StopKind::Pickup, request: r });
                }
                here = l;
            }
            PathNode::Zone(_) => {
                let mut left = ds;
                while !left.is_empty() {
                    let k = (0..left.len())
                        .min_by_key(|&k| (network.time(here, left[k].1), left[k].1, left[k].0))
                        .unwrap();
                    let (r, l) = left.remove(k);
                    stops.push(Stop { location: l, kind: StopKind::Dropoff, request: r });
                    here = l;
                }
            }
        }
    }
    stops
}
