use super::simplex::Tableau;
use super::{Model, Solution, Status};
use crate::budget::Deadline;
use alloc::vec::Vec;

const INT_TOL: f64 = 1e-6;

struct Frame {
    var: usize,
    saved: (f64, f64),
    value: f64,
    down_done: bool,
}

pub(super) fn branch_and_bound<D: Deadline>(model: &Model, deadline: &D, start: Option<Vec<f64>>) -> Solution {
    let mut lp = Tableau::new(model);
    lp.perturb_costs();
    // with every bound finite, rounding drift stays small between the
    // periodic refactors; skip the per-node rebuild
    if model.vars.iter().all(|v| v.lb.is_finite() && v.ub.is_finite()) {
        lp.polish_after = 200;
    }
    let sign = lp.obj_sign();
    // every objective term integral: bounds can be rounded
    let integral_objective = model.vars.iter().all(|v| v.obj == 0.0 || (v.integer && v.obj == libm::round(v.obj)));
    let mut order: Vec<usize> = (0..model.vars.len()).filter(|&j| model.vars[j].integer).collect();
    order.sort_by_key(|&j| (-model.vars[j].priority, j));

    // internal objective
    let mut incumbent: Option<(Vec<f64>, f64)> = start.filter(|v| v.len() == model.vars.len() && model.is_feasible(v)).map(|v| {
        let z = sign * model.objective_at(&v);
        (v, z)
    });
    let mut stack: Vec<Frame> = Vec::new();
    let mut nodes = 0u64;
    let mut timed_out = false;
    let mut unbounded = false;

    'search: loop {
        nodes += 1;
        let status = lp.solve(deadline);
        let mut explore = false;
        match status {
            Status::Timeout => {
                timed_out = true;
                break 'search;
            }
            Status::Unbounded => {
                unbounded = true;
                break 'search;
            }
            Status::Optimal => {
                let z = lp.objective_bound();
                let pruned = match &incumbent {
                    None => false,
                    Some((_, best)) => {
                        if integral_objective {
                            libm::ceil(z - INT_TOL) >= *best - INT_TOL
                        } else {
                            // gaps below the perturbation size are not worth a subtree
                            z >= *best - lp.perturb_slack() - 1e-9 * best.abs().max(1.0)
                        }
                    }
                };
                if !pruned {
                    explore = true;
                }
            }
            _ => {}
        }
        if explore {
            let mut branch: Option<(usize, f64)> = None;
            let mut best_key = (i32::MIN, -1.0);
            for &j in &order {
                let v = lp.value(j);
                let f = v - libm::floor(v);
                let dist = f.min(1.0 - f);
                if dist > INT_TOL {
                    let key = (model.vars[j].priority, dist);
                    if branch.is_none() || key.0 > best_key.0 || (key.0 == best_key.0 && key.1 > best_key.1 + 1e-12) {
                        branch = Some((j, v));
                        best_key = key;
                    }
                }
            }
            match branch {
                Some((j, v)) => {
                    let saved = (lp.lb[j], lp.ub[j]);
                    stack.push(Frame { var: j, saved, value: v, down_done: false });
                    lp.set_bounds(j, libm::ceil(v), saved.1);
                    continue 'search;
                }
                None => {
                    let mut values = lp.structural_values();
                    for &j in &order {
                        values[j] = libm::round(values[j]);
                    }
                    if model.is_feasible(&values) {
                        let z = sign * model.objective_at(&values);
                        if incumbent.as_ref().map_or(true, |(_, b)| z < *b - 1e-12) {
                            incumbent = Some((values, z));
                        }
                    }
                }
            }
        }
        // backtrack
        loop {
            let Some(top) = stack.last_mut() else { break 'search };
            let j = top.var;
            if !top.down_done {
                top.down_done = true;
                let (l, _) = top.saved;
                let v = top.value;
                lp.set_bounds(j, l, libm::floor(v));
                continue 'search;
            }
            let saved = top.saved;
            stack.pop();
            lp.set_bounds(j, saved.0, saved.1);
        }
    }

    let iterations = lp.iterations;
    let mut sol = match incumbent {
        Some((values, _)) => Solution {
            status: if timed_out { Status::FeasibleTimeout } else { Status::Optimal },
            objective: model.objective_at(&values),
            values,
            duals: Vec::new(),
            nodes,
            iterations,
        },
        None => Solution::empty(if timed_out {
            Status::Timeout
        } else if unbounded {
            Status::Unbounded
        } else {
            Status::Infeasible
        }),
    };
    if unbounded {
        sol.status = Status::Unbounded;
    }
    sol.nodes = nodes;
    sol.iterations = iterations;
    sol
}
