use super::{FutureProblem, FutureSampleSet, FutureSolution, SupplyType};
use crate::assign::{build_zac_model, solve_zac_blocks, AssignmentSolution};
use crate::budget::Share;
use alloc::collections::BTreeMap;
use crate::budget::Deadline;
use crate::par::par_map;
use crate::solver::{self, Direction, Model, Sense, Status, VarId};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

const CONVERGED_TOL: f64 = 1e-7;

/// Second-stage value of one sample for a given supply, with the dual
/// prices that make up a cut.
#[derive(Clone, Debug, PartialEq)]
pub struct SlaveResult {
    /// Best matched weight (primal).
    pub value: f64,
    /// Objective of the dual at `alpha`, `beta`.
    pub dual_value: f64,
    /// Price per supply type.
    pub alpha: Vec<f64>,
    /// Price per subelement.
    pub beta: Vec<f64>,
    /// Fractional matching (type index, subelement, amount).
    pub matching: Vec<(usize, usize, f64)>,
}

/// Solves the matching LP of sample `k` through its dual with the simplex:
/// minimise `sum alpha*supply + sum beta` with `alpha_i + beta_s >= w_is`.
/// The row duals give the primal matching back. Same answer as
/// [`slave_value`], far slower on large samples.
pub fn slave_value_lp<D: Deadline>(
    set: &FutureSampleSet,
    k: usize,
    types: &[SupplyType],
    supply: &[f64],
    deadline: &D,
) -> SlaveResult {
    let sample = &set.samples[k];
    let mut m = Model::new(Direction::Minimize);
    let alpha: Vec<VarId> = types
        .iter()
        .enumerate()
        .map(|(i, _)| m.add_var(format!("a{i}"), 0.0, f64::INFINITY, supply[i], false))
        .collect();
    let beta: Vec<VarId> = (0..sample.subelements.len())
        .map(|s| m.add_var(format!("b{s}"), 0.0, f64::INFINITY, 1.0, false))
        .collect();
    let mut edges = Vec::new();
    for (i, &ty) in types.iter().enumerate() {
        for s in 0..sample.subelements.len() {
            let w = set.weight(k, ty, s);
            if w > 0.0 {
                m.add_row(format!("e{i}_{s}"), vec![(alpha[i], 1.0), (beta[s], 1.0)], Sense::Ge, w);
                edges.push((i, s, w));
            }
        }
    }
    if edges.is_empty() {
        return SlaveResult {
            value: 0.0,
            dual_value: 0.0,
            alpha: vec![0.0; types.len()],
            beta: vec![0.0; beta.len()],
            matching: Vec::new(),
        };
    }
    let sol = solver::solve_lp(&m, deadline);
    assert!(sol.status == Status::Optimal, "matching dual is always feasible and bounded");
    let matching: Vec<(usize, usize, f64)> = edges
        .iter()
        .zip(&sol.duals)
        .map(|(&(i, s, _), &u)| (i, s, u.abs()))
        .filter(|&(_, _, u)| u > 1e-9)
        .collect();
    let value = edges.iter().zip(&sol.duals).map(|(&(_, _, w), &u)| w * u.abs()).sum();
    SlaveResult {
        value,
        dual_value: sol.objective,
        alpha: alpha.iter().map(|&v| sol.value(v)).collect(),
        beta: beta.iter().map(|&v| sol.value(v)).collect(),
        matching,
    }
}

/// Matching of sample `k` against `supply` as a min-cost flow
/// (source -> type -> subelement -> sink) by successive shortest paths.
/// Duals come from shortest-path potentials on the final residual graph.
pub fn slave_value<D: Deadline>(
    set: &FutureSampleSet,
    k: usize,
    types: &[SupplyType],
    supply: &[f64],
    _deadline: &D,
) -> SlaveResult {
    let sample = &set.samples[k];
    let nt = types.len();
    let ns = sample.subelements.len();
    let mut edges = Vec::new();
    for (i, &ty) in types.iter().enumerate() {
        for s in 0..ns {
            let w = set.weight(k, ty, s);
            if w > 0.0 {
                edges.push((i, s, w));
            }
        }
    }
    let mut g = flow::Graph::new(nt + ns + 2);
    let (src, sink) = (0, nt + ns + 1);
    for (i, &y) in supply.iter().enumerate() {
        g.add(src, 1 + i, y.max(0.0), 0.0);
    }
    let pair: Vec<usize> = edges.iter().map(|&(i, s, w)| g.add(1 + i, 1 + nt + s, f64::INFINITY, -w)).collect();
    for s in 0..ns {
        g.add(1 + nt + s, sink, 1.0, 0.0);
    }
    g.min_cost_flow(src, sink);
    let matching: Vec<(usize, usize, f64)> = edges
        .iter()
        .zip(&pair)
        .map(|(&(i, s, _), &e)| (i, s, g.flow(e)))
        .filter(|&(_, _, f)| f > 1e-9)
        .collect();
    let value = edges.iter().zip(&pair).map(|(&(_, _, w), &e)| w * g.flow(e)).sum();
    // potentials of the residual graph closed by an uncapacitated sink -> source arc
    g.add(sink, src, f64::INFINITY, 0.0);
    let pi = g.potentials();
    let alpha: Vec<f64> = (0..nt).map(|i| (pi[1 + i] - pi[src]).max(0.0)).collect();
    let beta: Vec<f64> = (0..ns).map(|s| (pi[src] - pi[1 + nt + s]).max(0.0)).collect();
    let dual_value = alpha.iter().zip(supply).map(|(a, y)| a * y).sum::<f64>() + beta.iter().sum::<f64>();
    SlaveResult { value, dual_value, alpha, beta, matching }
}

mod flow {
    use alloc::collections::{BinaryHeap, VecDeque};
    use alloc::vec;
    use alloc::vec::Vec;
    use core::cmp::Ordering;

    const EPS: f64 = 1e-9;

    struct Arc {
        to: usize,
        cap: f64,
        cost: f64,
    }

    /// Residual graph; arc `2e` is forward, `2e + 1` its reverse.
    pub(super) struct Graph {
        arcs: Vec<Arc>,
        out: Vec<Vec<usize>>,
    }

    #[derive(PartialEq)]
    struct Entry(f64, usize);
    impl Eq for Entry {}
    impl PartialOrd for Entry {
        fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
            Some(self.cmp(o))
        }
    }
    impl Ord for Entry {
        fn cmp(&self, o: &Self) -> Ordering {
            o.0.total_cmp(&self.0).then(o.1.cmp(&self.1))
        }
    }

    impl Graph {
        pub(super) fn new(n: usize) -> Graph {
            Graph { arcs: Vec::new(), out: vec![Vec::new(); n] }
        }

        pub(super) fn add(&mut self, from: usize, to: usize, cap: f64, cost: f64) -> usize {
            let e = self.arcs.len();
            self.out[from].push(e);
            self.arcs.push(Arc { to, cap, cost });
            self.out[to].push(e + 1);
            self.arcs.push(Arc { to: from, cap: 0.0, cost: -cost });
            e / 2
        }

        pub(super) fn flow(&self, e: usize) -> f64 {
            self.arcs[2 * e + 1].cap
        }

        fn tail(&self, a: usize) -> usize {
            self.arcs[a ^ 1].to
        }

        /// Queue-based Bellman-Ford from a virtual root joined to every
        /// node at cost 0. Assumes no negative residual cycle.
        pub(super) fn potentials(&self) -> Vec<f64> {
            let n = self.out.len();
            let mut d = vec![0.0; n];
            let mut queued = vec![true; n];
            let mut q: VecDeque<usize> = (0..n).collect();
            while let Some(u) = q.pop_front() {
                queued[u] = false;
                for &a in &self.out[u] {
                    let arc = &self.arcs[a];
                    if arc.cap > EPS && d[u] + arc.cost < d[arc.to] - EPS {
                        d[arc.to] = d[u] + arc.cost;
                        if !queued[arc.to] {
                            queued[arc.to] = true;
                            q.push_back(arc.to);
                        }
                    }
                }
            }
            d
        }

        /// Pushes flow from `s` to `t` while a negative-cost path exists.
        pub(super) fn min_cost_flow(&mut self, s: usize, t: usize) {
            let n = self.out.len();
            // no negative arcs leave a residual cycle yet, so plain
            // potentials make every reduced cost non-negative
            let mut pi = self.potentials();
            loop {
                let mut dist = vec![f64::INFINITY; n];
                let mut via = vec![usize::MAX; n];
                let mut heap = BinaryHeap::new();
                dist[s] = 0.0;
                heap.push(Entry(0.0, s));
                while let Some(Entry(d, u)) = heap.pop() {
                    if d > dist[u] {
                        continue;
                    }
                    for &a in &self.out[u] {
                        let arc = &self.arcs[a];
                        if arc.cap <= EPS {
                            continue;
                        }
                        let rc = (arc.cost + pi[u] - pi[arc.to]).max(0.0);
                        if d + rc < dist[arc.to] - 1e-12 {
                            dist[arc.to] = d + rc;
                            via[arc.to] = a;
                            heap.push(Entry(dist[arc.to], arc.to));
                        }
                    }
                }
                if !dist[t].is_finite() || dist[t] + pi[t] - pi[s] >= -EPS {
                    return;
                }
                let cap_t = dist[t];
                for v in 0..n {
                    pi[v] += dist[v].min(cap_t);
                }
                let mut push = f64::INFINITY;
                let mut v = t;
                while v != s {
                    let a = via[v];
                    push = push.min(self.arcs[a].cap);
                    v = self.tail(a);
                }
                let mut v = t;
                while v != s {
                    let a = via[v];
                    self.arcs[a].cap -= push;
                    self.arcs[a ^ 1].cap += push;
                    v = self.tail(a);
                }
            }
        }
    }
}

/// `theta[sample] <= sum alpha[type] * supply[type] + constant`
#[derive(Clone, Debug, PartialEq)]
pub struct Cut {
    pub iteration: u32,
    pub sample: usize,
    pub alpha: Vec<f64>,
    pub constant: f64,
}

impl Cut {
    pub fn bound(&self, supply: &[f64]) -> f64 {
        self.constant + self.alpha.iter().zip(supply).map(|(a, y)| a * y).sum::<f64>()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BendersLog {
    pub iterations: u32,
    /// Supply types the cuts and supplies are indexed by.
    pub types: Vec<SupplyType>,
    /// Master supply per iteration.
    pub supplies: Vec<Vec<f64>>,
    pub cuts: Vec<Cut>,
    /// Best true objective found.
    pub lower: f64,
    /// Last master bound.
    pub upper: f64,
    pub converged: bool,
    pub timed_out: bool,
    /// (iteration, lower, upper) after each master solve.
    pub trace: Vec<(u32, f64, f64)>,
}

impl BendersLog {
    pub fn gap(&self) -> f64 {
        (self.upper - self.lower).max(0.0)
    }
}

/// Supply per type implied by the chosen vehicle paths.
fn supply_of(types: &[SupplyType], y: &[(usize, usize, VarId)], values: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; types.len()];
    for &(_, ti, v) in y {
        out[ti] += libm::round(values[v.0]);
    }
    out
}

/// Decomposed solve: the master picks today's assignment plus one bounded
/// estimate per sample; each sample's matching LP returns a cut.
/// Stops when no estimate exceeds its sample's value at the master's
/// supply, or when the deadline hits (returning the best assignment seen).
pub fn benders_solve<D: Deadline + Sync>(problem: &FutureProblem<'_>, deadline: &D) -> (FutureSolution, BendersLog) {
    let graph = problem.graph;
    let set = problem.samples;
    let all: Vec<usize> = (0..graph.paths.len()).collect();
    let mut zac = build_zac_model(graph, &all);
    let types = problem.types();
    // y variables tagged by the type they supply
    let y_typed: Vec<(usize, usize, VarId)> = zac
        .y
        .iter()
        .enumerate()
        .filter_map(|(j, y)| {
            let ty = problem.path_type[y.path.index()]?;
            Some((j, types.binary_search(&ty).unwrap(), y.var))
        })
        .collect();
    let k_count = set.samples.len();
    let scale = if k_count == 0 { 0.0 } else { 1.0 / k_count as f64 };
    let theta: Vec<VarId> = set
        .samples
        .iter()
        .enumerate()
        .map(|(k, s)| zac.model.add_var(format!("theta{k}"), 0.0, s.total_weight(), scale, false))
        .collect();

    let mut log = BendersLog { lower: f64::NEG_INFINITY, upper: f64::INFINITY, types: types.clone(), ..Default::default() };
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut visited: Vec<Vec<f64>> = Vec::new();
    // Today's part splits into independent blocks. Solving them apart
    // first gives a starting point and one valid row per proven block,
    // which keeps the joint search from multiplying the blocks' trees.
    let (today, blocks) = solve_zac_blocks(graph, &Share::new(deadline, 0.5));
    let mut best_nodes = today.nodes;
    let all_optimal = blocks.iter().all(|b| b.optimal);
    let mut block_of = vec![usize::MAX; graph.paths.len()];
    for (b, r) in blocks.iter().enumerate() {
        for &m in &r.paths {
            block_of[m] = b;
        }
    }
    let mut rows: BTreeMap<usize, Vec<(VarId, f64)>> = BTreeMap::new();
    for x in &zac.x {
        let b = block_of[x.path.index()];
        if blocks[b].optimal {
            rows.entry(b).or_default().push((x.var, zac.model.vars[x.var.0].obj));
        }
    }
    for (b, coefs) in rows {
        zac.model.add_row(format!("block{b}"), coefs, Sense::Le, blocks[b].value);
    }
    let mut warm = vec![0.0; zac.model.num_vars()];
    for x in &zac.x {
        if today.request_path.get(&x.request) == Some(&x.path) {
            warm[x.var.0] = 1.0;
        }
    }
    for y in &zac.y {
        if today.vehicle_path.get(&y.vehicle) == Some(&y.path) {
            warm[y.var.0] = 1.0;
        }
    }
    loop {
        log.iterations += 1;
        // any assignment is feasible once each estimate sits at its lowest cut
        let at = supply_of(&types, &y_typed, &warm);
        for (k, &t) in theta.iter().enumerate() {
            let cap = zac.model.vars[t.0].ub;
            warm[t.0] = log.cuts.iter().filter(|c| c.sample == k).map(|c| c.bound(&at)).fold(cap, f64::min).max(0.0);
        }
        // without cuts every estimate sits at its cap and the blocks are
        // independent, so the block optima already solve the master
        let sol = if log.cuts.is_empty() && all_optimal {
            solver::Solution {
                status: Status::Optimal,
                objective: zac.model.objective_at(&warm),
                values: warm.clone(),
                duals: Vec::new(),
                nodes: 0,
                iterations: 0,
            }
        } else {
            // half of what is left, so a stalled master still leaves room
            // for the cuts its incumbent yields
            solver::solve_from(&zac.model, &Share::new(deadline, 0.5), warm.clone())
        };
        best_nodes += sol.nodes;
        if !sol.status.has_solution() {
            log.timed_out = true;
            break;
        }
        let supply = supply_of(&types, &y_typed, &sol.values);
        let slaves: Vec<SlaveResult> =
            par_map(&(0..k_count).collect::<Vec<_>>(), |&k| slave_value(set, k, &types, &supply, deadline));
        let today: f64 = zac.x.iter().map(|x| zac.model.vars[x.var.0].obj * libm::round(sol.values[x.var.0])).sum();
        let value = today + scale * slaves.iter().map(|s| s.value).sum::<f64>();
        if best.as_ref().is_none_or(|(v, _)| value > *v + 1e-9) {
            best = Some((value, sol.values.clone()));
        }
        log.lower = best.as_ref().unwrap().0;
        if sol.status == Status::Optimal {
            log.upper = sol.objective;
        }
        log.trace.push((log.iterations, log.lower, log.upper));
        let proven = sol.status == Status::Optimal;
        log.supplies.push(supply.clone());
        let repeat = visited.contains(&supply);
        let mut open = false;
        for (k, s) in slaves.iter().enumerate() {
            if sol.values[theta[k].0] <= s.value + CONVERGED_TOL {
                continue;
            }
            open = true;
            if repeat {
                continue;
            }
            let mut coefs = vec![(theta[k], 1.0)];
            for &(_, ti, v) in &y_typed {
                if s.alpha[ti] > 0.0 {
                    coefs.push((v, -s.alpha[ti]));
                }
            }
            let rhs: f64 = s.beta.iter().sum();
            zac.model.add_row(format!("cut{}_{k}", log.cuts.len()), coefs, Sense::Le, rhs);
            log.cuts.push(Cut { iteration: log.iterations, sample: k, alpha: s.alpha.clone(), constant: rhs });
        }
        // a revisited supply already has its cuts, so any excess is solver tolerance
        if !open || repeat {
            if proven {
                log.converged = true;
                log.upper = log.upper.max(log.lower);
            } else {
                // nothing new to cut and no proof in sight
                log.timed_out = true;
            }
            break;
        }
        visited.push(supply);
        warm = sol.values.clone();
        if deadline.expired() {
            log.timed_out = true;
            break;
        }
    }

    let mut assignment = AssignmentSolution::empty();
    assignment.nodes = best_nodes;
    if !log.converged {
        assignment.status = Status::FeasibleTimeout;
    }
    let Some((value, values)) = best else {
        log.lower = 0.0;
        return (FutureSolution { assignment, future_value: 0.0 }, log);
    };
    let fake = solver::Solution {
        status: Status::Optimal,
        values,
        objective: value,
        duals: Vec::new(),
        nodes: 0,
        iterations: 0,
    };
    zac.extract(&fake, &mut assignment);
    let today: f64 = assignment.request_path.keys().map(|&r| graph.weight(r)).sum();
    assignment.objective = value;
    (FutureSolution { assignment, future_value: value - today }, log)
}
