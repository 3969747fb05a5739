//! Small exact LP/MILP solver: bounded dual simplex on a dense tableau and
//! depth-first branch-and-bound that re-uses the tableau between nodes.
//!
//! Sized for desk-scale models (a few thousand variables at most).

mod bnb;
mod simplex;

use crate::budget::Deadline;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RowId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Maximize,
    Minimize,
}

#[derive(Clone, Debug)]
pub struct Variable {
    pub name: String,
    pub lb: f64,
    pub ub: f64,
    pub obj: f64,
    pub integer: bool,
    /// Higher values are branched on first.
    pub priority: i32,
}

#[derive(Clone, Debug)]
pub struct Row {
    pub name: String,
    pub coefs: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Clone, Debug)]
pub struct Model {
    pub direction: Direction,
    pub vars: Vec<Variable>,
    pub rows: Vec<Row>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Optimal,
    /// The deadline hit with an incumbent in hand.
    FeasibleTimeout,
    /// The deadline hit before any feasible point was found.
    Timeout,
    Infeasible,
    Unbounded,
}

impl Status {
    pub fn has_solution(self) -> bool {
        matches!(self, Status::Optimal | Status::FeasibleTimeout)
    }
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub status: Status,
    pub values: Vec<f64>,
    pub objective: f64,
    /// Row duals as d(objective)/d(rhs); only filled by [`solve_lp`].
    pub duals: Vec<f64>,
    pub nodes: u64,
    pub iterations: u64,
}

impl Solution {
    fn empty(status: Status) -> Solution {
        Solution { status, values: Vec::new(), objective: 0.0, duals: Vec::new(), nodes: 0, iterations: 0 }
    }

    pub fn value(&self, v: VarId) -> f64 {
        self.values.get(v.0).copied().unwrap_or(0.0)
    }

    /// Value rounded to the nearest integer; for binaries and general integers.
    pub fn int_value(&self, v: VarId) -> i64 {
        libm::round(self.value(v)) as i64
    }
}

/// Tolerance used when checking a point against the model.
pub const FEAS_TOL: f64 = 1e-6;

impl Model {
    pub fn new(direction: Direction) -> Model {
        Model { direction, vars: Vec::new(), rows: Vec::new() }
    }

    pub fn add_var(&mut self, name: impl Into<String>, lb: f64, ub: f64, obj: f64, integer: bool) -> VarId {
        self.vars.push(Variable { name: name.into(), lb, ub, obj, integer, priority: 0 });
        VarId(self.vars.len() - 1)
    }

    pub fn add_binary(&mut self, name: impl Into<String>, obj: f64) -> VarId {
        self.add_var(name, 0.0, 1.0, obj, true)
    }

    pub fn set_priority(&mut self, v: VarId, priority: i32) {
        self.vars[v.0].priority = priority;
    }

    pub fn set_objective(&mut self, v: VarId, obj: f64) {
        self.vars[v.0].obj = obj;
    }

    pub fn add_row(&mut self, name: impl Into<String>, coefs: Vec<(VarId, f64)>, sense: Sense, rhs: f64) -> RowId {
        self.rows.push(Row { name: name.into(), coefs, sense, rhs });
        RowId(self.rows.len() - 1)
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn objective_at(&self, values: &[f64]) -> f64 {
        self.vars.iter().zip(values).map(|(v, x)| v.obj * x).sum()
    }

    /// Largest violation of bounds, rows and integrality at `values`.
    pub fn violation(&self, values: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (v, &x) in self.vars.iter().zip(values) {
            worst = worst.max(v.lb - x).max(x - v.ub);
            if v.integer {
                worst = worst.max((x - libm::round(x)).abs());
            }
        }
        for r in &self.rows {
            let lhs: f64 = r.coefs.iter().map(|&(v, a)| a * values[v.0]).sum();
            let gap = match r.sense {
                Sense::Le => lhs - r.rhs,
                Sense::Ge => r.rhs - lhs,
                Sense::Eq => (lhs - r.rhs).abs(),
            };
            worst = worst.max(gap);
        }
        worst
    }

    pub fn is_feasible(&self, values: &[f64]) -> bool {
        values.len() == self.vars.len() && self.violation(values) <= FEAS_TOL
    }

    /// CPLEX-style LP text, for handing the model to an external solver.
    pub fn to_lp_string(&self) -> String {
        let mut s = String::new();
        let name = |i: usize| -> String {
            let n = &self.vars[i].name;
            if n.is_empty() {
                format!("v{i}")
            } else {
                n.clone()
            }
        };
        let term = |s: &mut String, first: bool, a: f64, v: &str| {
            let sign = if a < 0.0 { "-" } else if first { "" } else { "+" };
            let _ = write!(s, " {sign} {} {v}", a.abs());
        };
        s.push_str(match self.direction {
            Direction::Maximize => "Maximize\n obj:",
            Direction::Minimize => "Minimize\n obj:",
        });
        let mut first = true;
        for (i, v) in self.vars.iter().enumerate() {
            if v.obj != 0.0 {
                term(&mut s, first, v.obj, &name(i));
                first = false;
            }
        }
        if first {
            s.push_str(" 0");
        }
        s.push_str("\nSubject To\n");
        for (k, r) in self.rows.iter().enumerate() {
            let rn = if r.name.is_empty() { format!("c{k}") } else { r.name.clone() };
            let _ = write!(s, " {rn}:");
            let mut first = true;
            for &(v, a) in &r.coefs {
                term(&mut s, first, a, &name(v.0));
                first = false;
            }
            if first {
                s.push_str(" 0 v0");
            }
            let op = match r.sense {
                Sense::Le => "<=",
                Sense::Eq => "=",
                Sense::Ge => ">=",
            };
            let _ = writeln!(s, " {op} {}", r.rhs);
        }
        s.push_str("Bounds\n");
        for (i, v) in self.vars.iter().enumerate() {
            let lo = if v.lb.is_finite() { format!("{}", v.lb) } else { String::from("-inf") };
            let hi = if v.ub.is_finite() { format!("{}", v.ub) } else { String::from("+inf") };
            let _ = writeln!(s, " {lo} <= {} <= {hi}", name(i));
        }
        let ints: Vec<String> = (0..self.vars.len()).filter(|&i| self.vars[i].integer).map(name).collect();
        if !ints.is_empty() {
            s.push_str("General\n");
            for n in ints {
                let _ = writeln!(s, " {n}");
            }
        }
        s.push_str("End\n");
        s
    }
}

/// Solves the continuous relaxation and reports row duals.
pub fn solve_lp<D: Deadline>(model: &Model, deadline: &D) -> Solution {
    let mut lp = simplex::Tableau::new(model);
    let status = lp.solve(deadline);
    let mut sol = Solution::empty(status);
    sol.iterations = lp.iterations;
    if status == Status::Optimal {
        sol.values = lp.structural_values();
        sol.objective = model.objective_at(&sol.values);
        sol.duals = lp.row_duals();
    }
    sol
}

/// Solves the model with integrality enforced.
pub fn solve<D: Deadline>(model: &Model, deadline: &D) -> Solution {
    if model.vars.iter().all(|v| !v.integer) {
        return solve_lp(model, deadline);
    }
    bnb::branch_and_bound(model, deadline, None)
}

/// Like [`solve`], with a feasible point to start from. An infeasible or
/// mis-sized `start` is ignored.
pub fn solve_from<D: Deadline>(model: &Model, deadline: &D, start: Vec<f64>) -> Solution {
    if model.vars.iter().all(|v| !v.integer) {
        return solve_lp(model, deadline);
    }
    bnb::branch_and_bound(model, deadline, Some(start))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::budget::NoDeadline;
    use alloc::vec;

    #[test]
    fn small_lp_with_duals() {
        // max 3x + 2y, x + y <= 4, x + 3y <= 7, x <= 3
        let mut m = Model::new(Direction::Maximize);
        let x = m.add_var("x", 0.0, f64::INFINITY, 3.0, false);
        let y = m.add_var("y", 0.0, f64::INFINITY, 2.0, false);
        m.add_row("a", vec![(x, 1.0), (y, 1.0)], Sense::Le, 4.0);
        m.add_row("b", vec![(x, 1.0), (y, 3.0)], Sense::Le, 7.0);
        m.add_row("c", vec![(x, 1.0)], Sense::Le, 3.0);
        let s = solve_lp(&m, &NoDeadline);
        assert_eq!(s.status, Status::Optimal);
        assert!((s.objective - 11.0).abs() < 1e-9);
        assert!((s.value(x) - 3.0).abs() < 1e-9 && (s.value(y) - 1.0).abs() < 1e-9);
        assert!((s.duals[0] - 2.0).abs() < 1e-9);
        assert!(s.duals[1].abs() < 1e-9);
        assert!((s.duals[2] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn minimise_with_ge_and_eq() {
        // min x + 2y, x + y >= 3, x - y = 1
        let mut m = Model::new(Direction::Minimize);
        let x = m.add_var("x", 0.0, 10.0, 1.0, false);
        let y = m.add_var("y", 0.0, 10.0, 2.0, false);
        m.add_row("", vec![(x, 1.0), (y, 1.0)], Sense::Ge, 3.0);
        m.add_row("", vec![(x, 1.0), (y, -1.0)], Sense::Eq, 1.0);
        let s = solve_lp(&m, &NoDeadline);
        assert_eq!(s.status, Status::Optimal);
        assert!((s.objective - 4.0).abs() < 1e-9);
        // d obj / d rhs: raising the first rhs by 1 costs 1.5
        assert!((s.duals[0] - 1.5).abs() < 1e-9);
        assert!((s.duals[1] + 0.5).abs() < 1e-9);
    }

    #[test]
    fn infeasible_lp() {
        let mut m = Model::new(Direction::Maximize);
        let x = m.add_var("x", 0.0, 1.0, 1.0, false);
        m.add_row("", vec![(x, 1.0)], Sense::Ge, 2.0);
        assert_eq!(solve_lp(&m, &NoDeadline).status, Status::Infeasible);
    }

    #[test]
    fn unbounded_lp() {
        let mut m = Model::new(Direction::Maximize);
        let x = m.add_var("x", 0.0, f64::INFINITY, 1.0, false);
        let y = m.add_var("y", 0.0, f64::INFINITY, 0.0, false);
        m.add_row("", vec![(x, 1.0), (y, -1.0)], Sense::Le, 1.0);
        assert_eq!(solve_lp(&m, &NoDeadline).status, Status::Unbounded);
    }

    #[test]
    fn knapsack_needs_branching() {
        // max 5a + 4b + 3c, 2a + 3b + c <= 5, 4a + b + 2c <= 11, 3a + 4b + 2c <= 8
        let mut m = Model::new(Direction::Maximize);
        let a = m.add_var("a", 0.0, 10.0, 5.0, true);
        let b = m.add_var("b", 0.0, 10.0, 4.0, true);
        let c = m.add_var("c", 0.0, 10.0, 3.0, true);
        m.add_row("", vec![(a, 2.0), (b, 3.0), (c, 1.0)], Sense::Le, 5.0);
        m.add_row("", vec![(a, 4.0), (b, 1.0), (c, 2.0)], Sense::Le, 11.0);
        m.add_row("", vec![(a, 3.0), (b, 4.0), (c, 2.0)], Sense::Le, 8.0);
        let s = solve(&m, &NoDeadline);
        assert_eq!(s.status, Status::Optimal);
        assert!((s.objective - 13.0).abs() < 1e-9, "{}", s.objective);
        assert!(m.is_feasible(&s.values));
    }

    #[test]
    fn binary_odd_cycle() {
        // max x0+x1+x2 with pairwise x_i + x_j <= 1: LP gives 1.5, integer 1
        let mut m = Model::new(Direction::Maximize);
        let v: Vec<VarId> = (0..3).map(|i| m.add_binary(format!("x{i}"), 1.0)).collect();
        for (i, j) in [(0, 1), (1, 2), (0, 2)] {
            m.add_row("", vec![(v[i], 1.0), (v[j], 1.0)], Sense::Le, 1.0);
        }
        assert!((solve_lp(&m, &NoDeadline).objective - 1.5).abs() < 1e-9);
        let s = solve(&m, &NoDeadline);
        assert_eq!(s.status, Status::Optimal);
        assert!((s.objective - 1.0).abs() < 1e-9);
    }

    #[test]
    fn start_point_is_kept_on_timeout_and_ignored_when_infeasible() {
        let mut m = Model::new(Direction::Maximize);
        let v: Vec<VarId> = (0..3).map(|i| m.add_binary(format!("x{i}"), (i + 1) as f64)).collect();
        m.add_row("", vec![(v[0], 1.0), (v[1], 1.0), (v[2], 1.0)], Sense::Le, 1.0);
        let s = solve_from(&m, &crate::budget::PollBudget::new(0), vec![1.0, 0.0, 0.0]);
        assert_eq!(s.status, Status::FeasibleTimeout);
        assert!((s.objective - 1.0).abs() < 1e-9);
        let s = solve_from(&m, &NoDeadline, vec![1.0, 1.0, 1.0]);
        assert_eq!(s.status, Status::Optimal);
        assert!((s.objective - 3.0).abs() < 1e-9);
        assert_eq!(solve_from(&m, &crate::budget::PollBudget::new(0), vec![1.0, 1.0, 0.0]).status, Status::Timeout);
    }

    #[test]
    fn lp_export_mentions_everything() {
        let mut m = Model::new(Direction::Maximize);
        let x = m.add_binary("x", 2.0);
        m.add_row("cap", vec![(x, 1.0)], Sense::Le, 1.0);
        let s = m.to_lp_string();
        assert!(s.contains("Maximize") && s.contains("cap:") && s.contains("General") && s.ends_with("End\n"));
    }
}
