use crate::budget::Deadline;
use crate::fleet::VehicleId;
use crate::network::{LocationId, Request, RequestId, RoadNetwork};
use crate::solver::{self, Direction, Model, Sense, Status, VarId};
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RebalancePlan {
    /// Vehicle heading towards the origin of a request.
    pub moves: BTreeMap<VehicleId, RequestId>,
    /// Total travel time of the moves.
    pub cost: u64,
    /// The LP optimum was integral without branching.
    pub integral: bool,
}

/// Sends idle vehicles towards unserved requests: the cheapest set of
/// `min(vehicles, requests)` disjoint vehicle/request pairs by travel time,
/// solved as an LP.
pub fn rebalance<D: Deadline>(
    vehicles: &[(VehicleId, LocationId)],
    requests: &[Request],
    network: &RoadNetwork,
    deadline: &D,
) -> RebalancePlan {
    let k = vehicles.len().min(requests.len());
    if k == 0 {
        return RebalancePlan { integral: true, ..Default::default() };
    }
    let mut model = Model::new(Direction::Minimize);
    let mut vars: Vec<(usize, usize, VarId)> = Vec::new();
    for (i, &(v, at)) in vehicles.iter().enumerate() {
        for (j, r) in requests.iter().enumerate() {
            let cost = network.time(at, r.origin) as f64;
            vars.push((i, j, model.add_var(format!("m{}_{}", v.0, r.id.0), 0.0, 1.0, cost, false)));
        }
    }
    for i in 0..vehicles.len() {
        let row = vars.iter().filter(|x| x.0 == i).map(|x| (x.2, 1.0)).collect();
        model.add_row(format!("v{i}"), row, Sense::Le, 1.0);
    }
    for j in 0..requests.len() {
        let row = vars.iter().filter(|x| x.1 == j).map(|x| (x.2, 1.0)).collect();
        model.add_row(format!("r{j}"), row, Sense::Le, 1.0);
    }
    model.add_row("count", vars.iter().map(|x| (x.2, 1.0)).collect(), Sense::Eq, k as f64);

    let mut sol = solver::solve_lp(&model, deadline);
    let mut integral = sol.status == Status::Optimal && sol.values.iter().all(|v| (v - libm::round(*v)).abs() <= 1e-6);
    if sol.status == Status::Optimal && !integral {
        for v in model.vars.iter_mut() {
            v.integer = true;
        }
        sol = solver::solve(&model, deadline);
        integral = false;
    }
    let mut plan = RebalancePlan { integral, ..Default::default() };
    if !sol.status.has_solution() {
        return plan;
    }
    for &(i, j, var) in &vars {
        if sol.int_value(var) == 1 {
            plan.moves.insert(vehicles[i].0, requests[j].id);
            plan.cost += network.time(vehicles[i].1, requests[j].origin) as u64;
        }
    }
    plan
}
