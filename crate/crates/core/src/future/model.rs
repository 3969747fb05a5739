use super::FutureProblem;
use crate::assign::{build_zac_model, AssignmentSolution, ZacModel};
use crate::budget::Deadline;
use crate::solver::{self, Sense, Status, VarId};
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

/// The two-stage program in one piece.
pub struct FutureModel {
    pub zac: ZacModel,
    /// (sample, type index, subelement, variable)
    pub u: Vec<(usize, usize, usize, VarId)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FutureSolution {
    pub assignment: AssignmentSolution,
    /// Sample-averaged matched future weight.
    pub future_value: f64,
}

/// Today's assignment program extended with one matching per sample,
/// averaged in the objective. Vehicles only supply the type their path
/// ends in.
pub fn build_zacfuture(problem: &FutureProblem<'_>) -> FutureModel {
    let graph = problem.graph;
    let all: Vec<usize> = (0..graph.paths.len()).collect();
    let mut zac = build_zac_model(graph, &all);
    let set = problem.samples;
    let k_count = set.samples.len();
    let types = problem.types();
    let mut u = Vec::new();
    if k_count == 0 {
        return FutureModel { zac, u };
    }
    let scale = 1.0 / k_count as f64;
    for (k, sample) in set.samples.iter().enumerate() {
        let mut by_sub: BTreeMap<usize, Vec<VarId>> = BTreeMap::new();
        for (ti, &ty) in types.iter().enumerate() {
            let mut row: Vec<(VarId, f64)> = Vec::new();
            for s in 0..sample.subelements.len() {
                let w = set.weight(k, ty, s);
                if w <= 0.0 {
                    continue;
                }
                let var = zac.model.add_binary(format!("u{k}_{ti}_{s}"), scale * w);
                u.push((k, ti, s, var));
                by_sub.entry(s).or_default().push(var);
                row.push((var, 1.0));
            }
            if row.is_empty() {
                continue;
            }
            for y in &zac.y {
                if problem.path_type[y.path.index()] == Some(ty) {
                    row.push((y.var, -1.0));
                }
            }
            zac.model.add_row(format!("s{k}_{ti}"), row, Sense::Le, 0.0);
        }
        for (s, vars) in by_sub {
            if vars.len() > 1 {
                zac.model.add_row(format!("e{k}_{s}"), vars.iter().map(|&v| (v, 1.0)).collect(), Sense::Le, 1.0);
            }
        }
    }
    FutureModel { zac, u }
}

/// Solves the two-stage program directly.
pub fn solve_monolithic<D: Deadline>(problem: &FutureProblem<'_>, deadline: &D) -> FutureSolution {
    let fm = build_zacfuture(problem);
    let sol = solver::solve(&fm.zac.model, deadline);
    let mut assignment = AssignmentSolution::empty();
    assignment.nodes = sol.nodes;
    assignment.status = match sol.status {
        Status::Optimal => Status::Optimal,
        _ => Status::FeasibleTimeout,
    };
    fm.zac.extract(&sol, &mut assignment);
    let today: f64 = assignment.request_path.keys().map(|&r| problem.graph.weight(r)).sum();
    let future_value = if sol.status.has_solution() {
        fm.u.iter().map(|&(_, _, _, v)| fm.zac.model.vars[v.0].obj * sol.int_value(v) as f64).sum()
    } else {
        0.0
    };
    assignment.objective = today + future_value;
    FutureSolution { assignment, future_value }
}
