use crate::fleet::{Stop, StopKind, VehicleId, VehicleState};
use crate::network::{Request, RequestId, RoadNetwork};
use crate::Seconds;
use alloc::collections::BTreeMap;
use alloc::vec::Vec;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GreedyOutcome {
    pub assigned: BTreeMap<RequestId, VehicleId>,
    /// New stop lists of the vehicles that took a request.
    pub routes: BTreeMap<VehicleId, Vec<Stop>>,
}

struct Plan<'a> {
    vehicle: &'a VehicleState,
    stops: Vec<Stop>,
    end: Seconds,
}

/// Walks a stop list from the vehicle's position; returns the finish time
/// if every wait, delay and capacity limit holds.
fn check(
    v: &VehicleState,
    stops: &[Stop],
    requests: &BTreeMap<RequestId, Request>,
    network: &RoadNetwork,
    tau: Seconds,
    lambda: Seconds,
) -> Option<Seconds> {
    let mut here = v.location;
    let mut now = v.available_at;
    let mut load = v.onboard() as u32;
    for s in stops {
        now += network.time(here, s.location) as Seconds;
        here = s.location;
        let r = &requests[&s.request];
        match s.kind {
            StopKind::Pickup => {
                if now > r.arrival + tau {
                    return None;
                }
                load += 1;
                if load > v.capacity {
                    return None;
                }
            }
            StopKind::Dropoff => {
                if now > r.arrival + network.time(r.origin, r.destination) as Seconds + lambda {
                    return None;
                }
                load -= 1;
            }
        }
    }
    Some(now)
}

/// Requests in arrival order, each inserted where it adds the least travel
/// time over all vehicles and insertion positions, or rejected when no
/// insertion keeps every limit.
pub fn greedy_insertion_baseline(
    demand: &[Request],
    vehicles: &[VehicleState],
    network: &RoadNetwork,
    tau: Seconds,
    lambda: Seconds,
) -> GreedyOutcome {
    let mut known: BTreeMap<RequestId, Request> = BTreeMap::new();
    for v in vehicles {
        for a in &v.assigned {
            known.insert(a.request.id, a.request);
        }
    }
    let mut plans: Vec<Plan> = vehicles
        .iter()
        .map(|v| {
            let end = check(v, &v.route, &known, network, Seconds::MAX / 4, Seconds::MAX / 4).unwrap_or(v.available_at);
            Plan { vehicle: v, stops: v.route.clone(), end }
        })
        .collect();
    let mut order: Vec<&Request> = demand.iter().collect();
    order.sort_by_key(|r| (r.arrival, r.id));
    let mut out = GreedyOutcome::default();
    for r in order {
        known.insert(r.id, *r);
        let pick = Stop { location: r.origin, kind: StopKind::Pickup, request: r.id };
        let drop = Stop { location: r.destination, kind: StopKind::Dropoff, request: r.id };
        let mut best: Option<(Seconds, VehicleId, usize, usize, Vec<Stop>, Seconds)> = None;
        for (k, plan) in plans.iter().enumerate() {
            let n = plan.stops.len();
            for i in 0..=n {
                for j in i..=n {
                    let mut trial = Vec::with_capacity(n + 2);
                    trial.extend_from_slice(&plan.stops[..i]);
                    trial.push(pick);
                    trial.extend_from_slice(&plan.stops[i..j]);
                    trial.push(drop);
                    trial.extend_from_slice(&plan.stops[j..]);
                    let Some(end) = check(plan.vehicle, &trial, &known, network, tau, lambda) else { continue };
                    let added = end - plan.end;
                    let better = best.as_ref().map_or(true, |b| (added, plan.vehicle.id) < (b.0, b.1));
                    if better {
                        best = Some((added, plan.vehicle.id, k, i, trial, end));
                    }
                }
            }
        }
        if let Some((_, id, k, _, stops, end)) = best {
            plans[k].stops = stops;
            plans[k].end = end;
            out.assigned.insert(r.id, id);
            out.routes.insert(id, plans[k].stops.clone());
        }
    }
    out
}
