//! Epoch loop: batch arrivals, build the RPV graph, assign, rebalance, then
//! move vehicles one second at a time.

use crate::config::{ConfigError, Method, SimConfig};
use crate::metrics::{summarize, BendersRow, EpochRow, MetricsReport, RequestRecord, Summary, TimingRow};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;
use zac_core::assign::{greedy_insertion_baseline, plan_route, rebalance, solve_zac, verify_assignment, AssignmentSolution};
use zac_core::budget::WallDeadline;
use zac_core::future::{abstract_samples, benders_solve, path_types, FutureProblem};
use zac_core::pathstore::{PartialPath, PathIndex, DEFAULT_BUCKET_WIDTH};
use zac_core::rpv::{build_rpv_graph, RpvConfig, RpvContext, RpvGraph};
use zac_core::zoning::{cluster, Zoning};
use zac_core::{
    AssignedRequest, Deadline, DemandTrace, LocationId, Request, RequestId, RoadNetwork, Seconds, Stop, StopKind,
    VehicleId, VehicleState,
};

/// One simulated vehicle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimVehicle {
    pub id: VehicleId,
    pub capacity: u32,
    /// Last node reached.
    pub node: LocationId,
    /// Node being driven to and the second of arrival.
    pub leg: Option<(LocationId, Seconds)>,
    pub route: Vec<Stop>,
    pub assigned: Vec<AssignedRequest>,
    pub rebalance: Option<LocationId>,
}

impl SimVehicle {
    pub fn onboard(&self) -> usize {
        self.assigned.iter().filter(|a| a.picked_up).count()
    }

    /// Dispatcher view at `t`: the next node it can change course at.
    pub fn snapshot(&self, t: Seconds) -> VehicleState {
        let (location, available_at) = self.leg.unwrap_or((self.node, t));
        VehicleState {
            id: self.id,
            location,
            available_at,
            assigned: self.assigned.clone(),
            capacity: self.capacity,
            route: self.route.clone(),
        }
    }

    fn target(&self) -> Option<LocationId> {
        self.route.first().map(|s| s.location).or(self.rebalance)
    }
}

/// Network-dependent data shared by runs with the same settings.
pub struct Prepared {
    pub index: PathIndex,
    pub zonings: Vec<Zoning>,
    pub zs: Zoning,
}

impl Prepared {
    pub fn new(net: &RoadNetwork, cfg: &SimConfig, paths: Vec<PartialPath>) -> Result<Prepared, ConfigError> {
        let zonings = cfg
            .zone_sizes
            .iter()
            .map(|&s| cluster(net, cfg.clustering, s))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let zs = cluster(net, cfg.clustering, cfg.zs).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(Prepared { index: PathIndex::build(paths, DEFAULT_BUCKET_WIDTH), zonings, zs })
    }
}

pub struct Simulator<'a> {
    pub cfg: SimConfig,
    net: &'a RoadNetwork,
    prep: &'a Prepared,
    trace: &'a DemandTrace,
    samples: Vec<Vec<Request>>,
    /// Capacity used to group future demand.
    future_kappa: u32,
    pub now: Seconds,
    pub vehicles: Vec<SimVehicle>,
    records: BTreeMap<RequestId, RequestRecord>,
    report: MetricsReport,
    wait_violations: usize,
    capacity_violations: usize,
}

impl<'a> Simulator<'a> {
    pub fn new(
        cfg: SimConfig,
        net: &'a RoadNetwork,
        prep: &'a Prepared,
        trace: &'a DemandTrace,
        sample_traces: &[DemandTrace],
    ) -> Result<Simulator<'a>, ConfigError> {
        cfg.validate()?;
        if cfg.method == Method::ZacBenders && sample_traces.len() < cfg.num_samples {
            return Err(ConfigError::Invalid(format!(
                "zacbenders needs {} sample traces, got {}",
                cfg.num_samples,
                sample_traces.len()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let starts: Vec<u32> = (0..cfg.fleet).map(|_| rng.gen_range(0..net.len() as u32)).collect();
        let caps = cfg.kappa.draw(cfg.fleet, &mut rng);
        let vehicles = starts
            .iter()
            .zip(&caps)
            .enumerate()
            .map(|(i, (&s, &c))| SimVehicle {
                id: VehicleId(i as u32),
                capacity: c,
                node: LocationId(s),
                leg: None,
                route: Vec::new(),
                assigned: Vec::new(),
                rebalance: None,
            })
            .collect();
        let future_kappa = if caps.is_empty() {
            1
        } else {
            (caps.iter().map(|&c| c as f64).sum::<f64>() / caps.len() as f64).round().max(1.0) as u32
        };
        let samples = sample_traces.iter().take(cfg.num_samples).map(|t| t.requests().to_vec()).collect();
        let report = MetricsReport {
            summary: Summary { method: cfg.method.to_string(), fleet: cfg.fleet, lambda: cfg.lambda, ..Default::default() },
            ..Default::default()
        };
        Ok(Simulator {
            cfg,
            net,
            prep,
            trace,
            samples,
            future_kappa,
            now: 0,
            vehicles,
            records: BTreeMap::new(),
            report,
            wait_violations: 0,
            capacity_violations: 0,
        })
    }

    pub fn records(&self) -> &BTreeMap<RequestId, RequestRecord> {
        &self.records
    }

    fn rpv_config(&self) -> RpvConfig {
        RpvConfig {
            tau: self.cfg.tau,
            lambda: self.cfg.lambda,
            max_destinations: self.cfg.max_destinations,
            node_budget: self.cfg.node_budget,
        }
    }

    /// One decision epoch at the current time, over requests arriving in
    /// `(after, now]`.
    pub fn run_epoch(&mut self, after: Seconds) -> AssignmentSolution {
        let started = Instant::now();
        let deadline = WallDeadline::after_secs(self.cfg.time_limit);
        let t = self.now;
        let epoch = t / self.cfg.delta;
        let demand: Vec<Request> = self.trace.window(after, t).to_vec();
        for r in &demand {
            self.records.insert(
                r.id,
                RequestRecord {
                    id: r.id,
                    origin: r.origin,
                    destination: r.destination,
                    arrival: r.arrival,
                    direct: self.net.time(r.origin, r.destination) as Seconds,
                    epoch,
                    vehicle: None,
                    pickup: None,
                    dropoff: None,
                },
            );
        }
        let snaps: Vec<VehicleState> = self.vehicles.iter().map(|v| v.snapshot(t)).collect();
        let mut row = EpochRow { epoch, t, arrived: demand.len(), ..Default::default() };
        let mut timing = TimingRow { epoch, ..Default::default() };
        let mut touched: BTreeSet<VehicleId> = BTreeSet::new();

        let solution = if self.cfg.method == Method::Greedy {
            let t0 = Instant::now();
            let out = greedy_insertion_baseline(&demand, &snaps, self.net, self.cfg.tau, self.cfg.lambda);
            timing.solve_ms = t0.elapsed().as_secs_f64() * 1e3;
            let by_id: BTreeMap<RequestId, Request> = demand.iter().map(|r| (r.id, *r)).collect();
            for (&r, &v) in &out.assigned {
                self.bind(v, by_id[&r]);
            }
            for (&v, stops) in &out.routes {
                let veh = &mut self.vehicles[v.0 as usize];
                veh.route = stops.clone();
                veh.rebalance = None;
                touched.insert(v);
            }
            row.status = "Optimal".into();
            let mut sol = AssignmentSolution::empty();
            sol.objective = out.assigned.len() as f64;
            sol
        } else {
            let ctx = RpvContext {
                network: self.net,
                index: &self.prep.index,
                zonings: &self.prep.zonings,
                config: self.rpv_config(),
            };
            let t0 = Instant::now();
            let (graph, stats) = build_rpv_graph(&ctx, t, &demand, &snaps);
            timing.build_ms = t0.elapsed().as_secs_f64() * 1e3;
            row.anchors = stats.anchors;
            row.candidates = stats.candidates;
            row.completions = stats.completions;
            row.truncated = stats.truncated;
            row.paths = stats.paths;
            let t1 = Instant::now();
            let sol = match self.cfg.method {
                Method::ZacBenders => self.solve_benders(&graph, epoch, &deadline, &mut row),
                _ => solve_zac(&graph, &deadline),
            };
            timing.solve_ms = t1.elapsed().as_secs_f64() * 1e3;
            row.status = format!("{:?}", sol.status);
            match verify_assignment(&graph, &sol) {
                Ok(()) => self.apply(&graph, &sol, &mut touched),
                Err(e) => {
                    log::error!("epoch {epoch}: solver output failed verification ({e}); rejecting the batch");
                    self.report.summary.rejected_solutions += 1;
                }
            }
            sol
        };
        row.timed_out = solution.timed_out();

        let unserved: Vec<Request> =
            demand.iter().filter(|r| self.records[&r.id].vehicle.is_none()).copied().collect();
        row.served = demand.len() - unserved.len();
        row.rejected = unserved.len();

        let idle: Vec<(VehicleId, LocationId)> = self
            .vehicles
            .iter()
            .filter(|v| v.assigned.is_empty() && v.route.is_empty() && !touched.contains(&v.id))
            .map(|v| (v.id, v.leg.map_or(v.node, |l| l.0)))
            .collect();
        let plan = rebalance(&idle, &unserved, self.net, &deadline);
        let origin: BTreeMap<RequestId, LocationId> = unserved.iter().map(|r| (r.id, r.origin)).collect();
        for (&v, r) in &plan.moves {
            self.vehicles[v.0 as usize].rebalance = Some(origin[r]);
        }
        row.rebalanced = plan.moves.len();

        timing.total_ms = started.elapsed().as_secs_f64() * 1e3;
        timing.timed_out = row.timed_out;
        self.report.epochs.push(row);
        self.report.timing.push(timing);
        solution
    }

    fn solve_benders(&mut self, graph: &RpvGraph, epoch: i64, deadline: &WallDeadline, row: &mut EpochRow) -> AssignmentSolution {
        let set = abstract_samples(
            &self.samples,
            &self.prep.zs,
            self.net,
            epoch,
            self.cfg.rho,
            self.cfg.delta,
            self.future_kappa,
            self.cfg.tau,
        );
        let problem = FutureProblem {
            graph,
            samples: &set,
            path_type: path_types(graph, &self.prep.zonings, &self.prep.zs, &set),
        };
        let budget_ms = deadline.remaining_secs().unwrap_or(0.0) * 1e3;
        let t0 = Instant::now();
        let (sol, log) = benders_solve(&problem, deadline);
        let wall_ms = t0.elapsed().as_secs_f64() * 1e3;
        row.future_value = sol.future_value;
        row.benders_iterations = log.iterations as usize;
        row.benders_converged = log.converged;
        self.report.benders.push(BendersRow {
            epoch,
            iterations: log.iterations as usize,
            cuts: log.cuts.len(),
            lower: log.lower,
            upper: log.upper,
            gap: log.gap(),
            wall_ms,
            budget_ms,
            converged: log.converged,
            timed_out: log.timed_out,
        });
        sol.assignment
    }

    fn bind(&mut self, v: VehicleId, r: Request) {
        self.vehicles[v.0 as usize].assigned.push(AssignedRequest { request: r, picked_up: false });
        if let Some(rec) = self.records.get_mut(&r.id) {
            rec.vehicle = Some(v);
        }
    }

    fn apply(&mut self, graph: &RpvGraph, sol: &AssignmentSolution, touched: &mut BTreeSet<VehicleId>) {
        for (&v, &m) in &sol.vehicle_path {
            let riders: Vec<RequestId> =
                sol.request_path.iter().filter(|&(_, &p)| p == m).map(|(&r, _)| r).collect();
            let stops = plan_route(graph, self.net, m, &riders);
            for r in &riders {
                self.bind(v, graph.requests[r]);
            }
            let veh = &mut self.vehicles[v.0 as usize];
            let dropped: BTreeSet<RequestId> =
                stops.iter().filter(|s| s.kind == StopKind::Dropoff).map(|s| s.request).collect();
            assert!(
                veh.assigned.iter().all(|a| dropped.contains(&a.request.id)),
                "route for {v} misses a committed drop-off"
            );
            veh.route = stops;
            veh.rebalance = None;
            touched.insert(v);
        }
    }

    fn fire(&mut self, i: usize, time: Seconds) {
        let tau = self.cfg.tau;
        loop {
            let v = &mut self.vehicles[i];
            let Some(&stop) = v.route.first() else { break };
            if stop.location != v.node {
                break;
            }
            v.route.remove(0);
            let rec = self.records.get_mut(&stop.request).expect("stop for a known request");
            match stop.kind {
                StopKind::Pickup => {
                    if let Some(a) = v.assigned.iter_mut().find(|a| a.request.id == stop.request) {
                        a.picked_up = true;
                    }
                    rec.pickup = Some(time);
                    if time - rec.arrival > tau {
                        self.wait_violations += 1;
                    }
                }
                StopKind::Dropoff => {
                    v.assigned.retain(|a| a.request.id != stop.request);
                    rec.dropoff = Some(time);
                }
            }
        }
        let v = &mut self.vehicles[i];
        if v.leg.is_none() && v.rebalance == Some(v.node) {
            v.rebalance = None;
        }
    }

    /// Moves the clock from `now` to `now + 1`.
    pub fn advance_second(&mut self) {
        let s = self.now;
        for i in 0..self.vehicles.len() {
            if self.vehicles[i].leg.is_some() {
                continue;
            }
            self.fire(i, s);
            let v = &mut self.vehicles[i];
            if let Some(target) = v.target() {
                if target != v.node {
                    let hop = self.net.next_hop(v.node, target);
                    let dt = self.net.edge_time(v.node, hop).expect("next hop is a neighbour") as Seconds;
                    v.leg = Some((hop, s + dt));
                }
            }
        }
        self.now = s + 1;
        for i in 0..self.vehicles.len() {
            let v = &mut self.vehicles[i];
            if let Some((next, at)) = v.leg {
                if at == self.now {
                    v.node = next;
                    v.leg = None;
                    self.fire(i, self.now);
                }
            }
            let v = &self.vehicles[i];
            if v.onboard() > v.capacity as usize {
                self.capacity_violations += 1;
            }
        }
    }

    fn busy(&self) -> bool {
        self.vehicles.iter().any(|v| !v.assigned.is_empty())
    }

    /// Runs every epoch up to the horizon, then drains onboard passengers.
    pub fn run(mut self) -> MetricsReport {
        let delta = self.cfg.delta;
        let epochs = (self.cfg.horizon + delta - 1) / delta;
        for k in 1..=epochs {
            let t = k * delta;
            while self.now < t {
                self.advance_second();
            }
            let after = if k == 1 { -1 } else { t - delta };
            self.run_epoch(after);
        }
        let limit = self.now + self.cfg.drain_limit;
        while self.busy() && self.now < limit {
            self.advance_second();
        }
        self.finish()
    }

    pub fn finish(mut self) -> MetricsReport {
        let mut report = std::mem::take(&mut self.report);
        report.requests = self.records.into_values().collect();
        summarize(&mut report.summary, &report.requests);
        report.summary.wait_violations = self.wait_violations;
        report.summary.capacity_violations = self.capacity_violations;
        report.summary.epochs = report.epochs.len();
        report.summary.timeouts = report.epochs.iter().filter(|e| e.timed_out).count();
        report.summary.truncated = report.epochs.iter().map(|e| e.truncated).sum();
        report.summary.end_time = self.now;
        report
    }
}

/// Full run on prepared data.
pub fn run_prepared(
    cfg: &SimConfig,
    net: &RoadNetwork,
    prep: &Prepared,
    trace: &DemandTrace,
    sample_traces: &[DemandTrace],
) -> Result<MetricsReport, ConfigError> {
    Ok(Simulator::new(cfg.clone(), net, prep, trace, sample_traces)?.run())
}

/// Enumerates paths, clusters zones and runs the simulation.
pub fn run_simulation(
    cfg: &SimConfig,
    net: &RoadNetwork,
    trace: &DemandTrace,
    sample_traces: &[DemandTrace],
) -> Result<MetricsReport, ConfigError> {
    cfg.validate()?;
    let paths = zac_core::pathstore::enumerate_paths(net, cfg.tau, zac_core::pathstore::DEFAULT_PATH_BUDGET)
        .map_err(|e| ConfigError::Invalid(e.to_string()))?
        .paths;
    let prep = Prepared::new(net, cfg, paths)?;
    run_prepared(cfg, net, &prep, trace, sample_traces)
}
