//! Bounded dual simplex over a dense tableau `B^-1 [A I]`.
//!
//! Every row gets a slack so the all-slack basis is always available.
//! Nonbasic columns sit at the bound matching the sign of their reduced
//! cost, which keeps the basis dual feasible under any bound change; this is
//! what lets branch-and-bound re-enter the dual simplex after branching.

use super::{Direction, Model, Sense, Status};
use crate::budget::Deadline;
use alloc::vec;
use alloc::vec::Vec;

/// Stand-in for an infinite bound the objective pushes a column towards.
const BIG: f64 = 1e9;
const PIVOT_TOL: f64 = 1e-9;
const PRIMAL_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-9;
const REFACTOR_EVERY: u32 = 1000;
const DEGENERATE_RUN: u32 = 50;

pub(crate) struct Tableau {
    m: usize,
    n: usize,
    cols: usize,
    /// Normalised constraint rows (structural part), row-major m x n.
    a: Vec<f64>,
    b: Vec<f64>,
    /// Internal minimisation costs over all columns.
    cost: Vec<f64>,
    pub(crate) lb: Vec<f64>,
    pub(crate) ub: Vec<f64>,
    row_sign: Vec<f64>,
    obj_sign: f64,
    tab: Vec<f64>,
    beta: Vec<f64>,
    basis: Vec<usize>,
    pos: Vec<usize>,
    x: Vec<f64>,
    d: Vec<f64>,
    since_refactor: u32,
    pub(crate) iterations: u64,
    /// Largest amount the perturbed objective can differ from the true one
    /// at any point inside the bounds.
    perturb_slack: f64,
    /// Pivots since the last refactor that make an optimal basis worth
    /// rebuilding from scratch before trusting it.
    pub(crate) polish_after: u32,
}

const NONBASIC: usize = usize::MAX;

impl Tableau {
    pub(crate) fn new(model: &Model) -> Tableau {
        let m = model.rows.len();
        let n = model.vars.len();
        let cols = n + m;
        let obj_sign = match model.direction {
            Direction::Minimize => 1.0,
            Direction::Maximize => -1.0,
        };
        let mut a = vec![0.0; m * n];
        let mut b = vec![0.0; m];
        let mut row_sign = vec![1.0; m];
        let mut lb = vec![0.0; cols];
        let mut ub = vec![f64::INFINITY; cols];
        for (i, r) in model.rows.iter().enumerate() {
            let s = if r.sense == Sense::Ge { -1.0 } else { 1.0 };
            row_sign[i] = s;
            for &(v, coef) in &r.coefs {
                a[i * n + v.0] += s * coef;
            }
            b[i] = s * r.rhs;
            if r.sense == Sense::Eq {
                ub[n + i] = 0.0;
            }
        }
        let mut cost = vec![0.0; cols];
        for (j, v) in model.vars.iter().enumerate() {
            cost[j] = obj_sign * v.obj;
            lb[j] = v.lb;
            ub[j] = v.ub;
        }
        let mut t = Tableau {
            m,
            n,
            cols,
            a,
            b,
            cost: cost.clone(),
            lb,
            ub,
            row_sign,
            obj_sign,
            tab: vec![0.0; m * cols],
            beta: vec![0.0; m],
            basis: (n..cols).collect(),
            pos: vec![NONBASIC; cols],
            x: vec![0.0; cols],
            d: cost,
            since_refactor: 0,
            iterations: 0,
            perturb_slack: 0.0,
            polish_after: 1,
        };
        for i in 0..m {
            t.tab[i * cols..i * cols + n].copy_from_slice(&t.a[i * n..(i + 1) * n]);
            t.tab[i * cols + n + i] = 1.0;
            t.pos[n + i] = i;
        }
        for j in 0..n {
            t.x[j] = t.resting_value(j);
        }
        t.recompute_beta();
        t
    }

    /// Nudges the costs of bounded structural columns away from zero so the
    /// dual ratio test rarely ties. Only for callers that need bounds and
    /// feasible points, not exact duals.
    pub(crate) fn perturb_costs(&mut self) {
        let mut slack = 0.0;
        for j in 0..self.n {
            let (l, u) = (self.lb[j], self.ub[j]);
            if !l.is_finite() || !u.is_finite() || l == u {
                continue;
            }
            // deterministic spread in [1, 2)
            let h = (j as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) >> 40;
            let spread = 1.0 + (h as f64) / (1u64 << 24) as f64;
            let c = self.cost[j];
            let delta = 1e-8 * spread * (1.0 + c.abs());
            let signed = if c < 0.0 { -delta } else { delta };
            self.cost[j] += signed;
            slack += delta * l.abs().max(u.abs());
        }
        self.perturb_slack = slack;
        self.d = self.cost.clone();
        for j in 0..self.n {
            self.x[j] = self.resting_value(j);
        }
        self.recompute_beta();
    }

    pub(crate) fn perturb_slack(&self) -> f64 {
        self.perturb_slack
    }

    /// Lower bound on the true internal objective over the current LP.
    pub(crate) fn objective_bound(&self) -> f64 {
        self.internal_objective() - self.perturb_slack
    }

    /// Bound a nonbasic column should rest at given its reduced cost.
    fn resting_value(&self, j: usize) -> f64 {
        let (l, u) = (self.lb[j], self.ub[j]);
        let lo = if l.is_finite() { l } else { -BIG };
        let hi = if u.is_finite() { u } else { BIG };
        if l == u {
            l
        } else if self.d[j] > DUAL_TOL {
            lo
        } else if self.d[j] < -DUAL_TOL {
            hi
        } else if self.x[j] == lo || self.x[j] == hi {
            // either bound is optimal; moving would only churn the basis
            self.x[j]
        } else if l.is_finite() {
            l
        } else if u.is_finite() {
            u
        } else {
            0.0
        }
    }

    fn recompute_beta(&mut self) {
        // beta = B^-1 (b - N x_N); the slack block of the tableau is B^-1
        let mut rhs = self.b.clone();
        for j in 0..self.cols {
            if self.pos[j] != NONBASIC || self.x[j] == 0.0 {
                continue;
            }
            let xj = self.x[j];
            if j < self.n {
                for (i, r) in rhs.iter_mut().enumerate() {
                    *r -= self.a[i * self.n + j] * xj;
                }
            } else {
                rhs[j - self.n] -= xj;
            }
        }
        for i in 0..self.m {
            let row = &self.tab[i * self.cols + self.n..(i + 1) * self.cols];
            self.beta[i] = row.iter().zip(&rhs).map(|(p, q)| p * q).sum();
        }
    }

    /// Rebuilds the tableau from the original data for the current basis.
    fn refactor(&mut self) -> bool {
        let m = self.m;
        let cols = self.cols;
        // [B | I] -> [I | B^-1]
        let mut aug = vec![0.0; m * 2 * m];
        for (r, &j) in self.basis.iter().enumerate() {
            for i in 0..m {
                aug[i * 2 * m + r] = self.column_entry(i, j);
            }
        }
        for i in 0..m {
            aug[i * 2 * m + m + i] = 1.0;
        }
        for c in 0..m {
            let p = (c..m)
                .max_by(|&x, &y| aug[x * 2 * m + c].abs().partial_cmp(&aug[y * 2 * m + c].abs()).unwrap())
                .unwrap();
            if aug[p * 2 * m + c].abs() < 1e-12 {
                return false;
            }
            if p != c {
                for k in 0..2 * m {
                    aug.swap(p * 2 * m + k, c * 2 * m + k);
                }
            }
            let inv = 1.0 / aug[c * 2 * m + c];
            for k in 0..2 * m {
                aug[c * 2 * m + k] *= inv;
            }
            for i in 0..m {
                if i == c {
                    continue;
                }
                let f = aug[i * 2 * m + c];
                if f != 0.0 {
                    let (lo, hi) = if i < c { (i, c) } else { (c, i) };
                    let (head, tail) = aug.split_at_mut(hi * 2 * m);
                    let (target, pivot) = if i < c {
                        (&mut head[lo * 2 * m..(lo + 1) * 2 * m], &tail[..2 * m])
                    } else {
                        (&mut tail[..2 * m], &head[lo * 2 * m..(lo + 1) * 2 * m])
                    };
                    for (t, &p) in target.iter_mut().zip(pivot) {
                        if p != 0.0 {
                            *t -= f * p;
                        }
                    }
                }
            }
        }
        // row r of B^-1 corresponds to basis position r
        let n = self.n;
        for r in 0..m {
            let binv = &aug[r * 2 * m + m..(r + 1) * 2 * m];
            let row = &mut self.tab[r * cols..(r + 1) * cols];
            row[..n].iter_mut().for_each(|v| *v = 0.0);
            for (i, &bi) in binv.iter().enumerate() {
                if bi != 0.0 {
                    for (t, &a) in row[..n].iter_mut().zip(&self.a[i * n..(i + 1) * n]) {
                        *t += bi * a;
                    }
                }
            }
            row[n..].copy_from_slice(binv);
        }
        self.recompute_beta();
        for j in 0..cols {
            if self.pos[j] != NONBASIC {
                self.d[j] = 0.0;
                continue;
            }
            let mut s = self.cost[j];
            for r in 0..m {
                let cb = self.cost[self.basis[r]];
                if cb != 0.0 {
                    s -= cb * self.tab[r * cols + j];
                }
            }
            self.d[j] = s;
        }
        // restore dual feasibility lost to rounding
        for j in 0..cols {
            if self.pos[j] == NONBASIC {
                let v = self.resting_value(j);
                if v != self.x[j] {
                    self.shift_nonbasic(j, v);
                }
            }
        }
        self.since_refactor = 0;
        true
    }

    fn column_entry(&self, i: usize, j: usize) -> f64 {
        if j < self.n {
            self.a[i * self.n + j]
        } else if j - self.n == i {
            1.0
        } else {
            0.0
        }
    }

    fn shift_nonbasic(&mut self, j: usize, v: f64) {
        let delta = v - self.x[j];
        if delta != 0.0 {
            for i in 0..self.m {
                let t = self.tab[i * self.cols + j];
                if t != 0.0 {
                    self.beta[i] -= t * delta;
                }
            }
        }
        self.x[j] = v;
    }

    /// Changes the bounds of a structural column, keeping dual feasibility.
    pub(crate) fn set_bounds(&mut self, j: usize, l: f64, u: f64) {
        self.lb[j] = l;
        self.ub[j] = u;
        if self.pos[j] == NONBASIC {
            let v = self.resting_value(j);
            self.shift_nonbasic(j, v);
        }
    }

    pub(crate) fn solve<D: Deadline>(&mut self, deadline: &D) -> Status {
        let mut degenerate = 0u32;
        let mut bland = false;
        let limit = 50 * (self.m + self.cols) as u64 + 1000;
        let mut local = 0u64;
        let mut polishes = 0u32;
        loop {
            if local % 32 == 0 && deadline.expired() {
                return Status::Timeout;
            }
            local += 1;
            if local > limit && !bland {
                bland = true;
            }
            if self.since_refactor >= REFACTOR_EVERY && !self.refactor() {
                return Status::Infeasible;
            }
            let Some((r, target)) = self.leaving_row(bland) else {
                if self.since_refactor >= self.polish_after {
                    if !self.refactor() {
                        return Status::Infeasible;
                    }
                    polishes += 1;
                    if self.leaving_row(bland).is_some() && polishes <= 8 {
                        continue;
                    }
                }
                return if self.at_artificial_bound() { Status::Unbounded } else { Status::Optimal };
            };
            let Some(q) = self.entering_column(r, target, bland) else {
                return Status::Infeasible;
            };
            let alpha = self.tab[r * self.cols + q];
            if (self.d[q] / alpha).abs() < 1e-12 {
                degenerate += 1;
                if degenerate >= DEGENERATE_RUN {
                    bland = true;
                }
            } else {
                degenerate = 0;
            }
            self.pivot(r, q, target);
            self.iterations += 1;
        }
    }

    fn at_artificial_bound(&self) -> bool {
        (0..self.cols).any(|j| {
            self.pos[j] == NONBASIC
                && ((!self.ub[j].is_finite() && self.x[j] >= BIG) || (!self.lb[j].is_finite() && self.x[j] <= -BIG))
        })
    }

    /// Most infeasible basic row (smallest basic index under Bland's rule)
    /// and the bound it must leave at.
    fn leaving_row(&self, bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64, f64)> = None;
        for r in 0..self.m {
            let j = self.basis[r];
            let v = self.beta[r];
            let (l, u) = (self.lb[j], self.ub[j]);
            let (gap, target) = if v < l - PRIMAL_TOL * (1.0 + l.abs()) {
                (l - v, l)
            } else if v > u + PRIMAL_TOL * (1.0 + u.abs()) {
                (v - u, u)
            } else {
                continue;
            };
            let better = match best {
                None => true,
                Some((br, bg, _)) => {
                    if bland {
                        j < self.basis[br]
                    } else {
                        gap > bg
                    }
                }
            };
            if better {
                best = Some((r, gap, target));
            }
        }
        best.map(|(r, _, t)| (r, t))
    }

    fn entering_column(&self, r: usize, target: f64, bland: bool) -> Option<usize> {
        let raise = self.beta[r] < target;
        let row = &self.tab[r * self.cols..(r + 1) * self.cols];
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.cols {
            if self.pos[j] != NONBASIC || self.lb[j] == self.ub[j] {
                continue;
            }
            let alpha = row[j];
            if alpha.abs() < PIVOT_TOL {
                continue;
            }
            let at_lower = self.x[j] <= self.lb[j];
            let at_upper = self.x[j] >= self.ub[j];
            // moving x_j up changes the basic value by -alpha
            let can_up = !at_upper;
            let can_down = !at_lower;
            let ok = if raise { (alpha < 0.0 && can_up) || (alpha > 0.0 && can_down) } else { (alpha > 0.0 && can_up) || (alpha < 0.0 && can_down) };
            if !ok {
                continue;
            }
            let ratio = self.d[j].abs() / alpha.abs();
            let better = match best {
                None => true,
                Some((_, br, ba)) => {
                    if ratio < br - 1e-12 {
                        true
                    } else if ratio <= br + 1e-12 {
                        !bland && alpha.abs() > ba
                    } else {
                        false
                    }
                }
            };
            if better {
                best = Some((j, ratio, alpha.abs()));
            }
        }
        best.map(|(j, _, _)| j)
    }

    fn pivot(&mut self, r: usize, q: usize, target: f64) {
        let cols = self.cols;
        let alpha = self.tab[r * cols + q];
        let step = (self.beta[r] - target) / alpha;
        for i in 0..self.m {
            if i != r {
                let t = self.tab[i * cols + q];
                if t != 0.0 {
                    self.beta[i] -= t * step;
                }
            }
        }
        let leaving = self.basis[r];
        self.x[q] += step;
        self.beta[r] = self.x[q];
        self.x[leaving] = target;
        self.pos[leaving] = NONBASIC;

        let ratio = self.d[q] / alpha;
        if ratio != 0.0 {
            for j in 0..cols {
                let t = self.tab[r * cols + j];
                if t != 0.0 {
                    self.d[j] -= ratio * t;
                }
            }
        }
        self.d[q] = 0.0;

        let inv = 1.0 / alpha;
        for v in &mut self.tab[r * cols..(r + 1) * cols] {
            *v *= inv;
        }
        let (head, rest) = self.tab.split_at_mut(r * cols);
        let (pivot_row, tail) = rest.split_at_mut(cols);
        for chunk in head.chunks_exact_mut(cols).chain(tail.chunks_exact_mut(cols)) {
            let f = chunk[q];
            if f != 0.0 {
                for (c, p) in chunk.iter_mut().zip(pivot_row.iter()) {
                    if *p != 0.0 {
                        *c -= f * p;
                    }
                }
                chunk[q] = 0.0;
            }
        }
        self.basis[r] = q;
        self.pos[q] = r;
        self.since_refactor += 1;
    }

    pub(crate) fn value(&self, j: usize) -> f64 {
        if self.pos[j] == NONBASIC {
            self.x[j]
        } else {
            self.beta[self.pos[j]]
        }
    }

    pub(crate) fn structural_values(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.value(j)).collect()
    }

    /// Internal (minimisation) objective of the current basic solution.
    pub(crate) fn internal_objective(&self) -> f64 {
        (0..self.n).map(|j| self.cost[j] * self.value(j)).sum()
    }

    pub(crate) fn obj_sign(&self) -> f64 {
        self.obj_sign
    }

    pub(crate) fn row_duals(&self) -> Vec<f64> {
        (0..self.m).map(|i| -self.d[self.n + i] * self.row_sign[i] * self.obj_sign).collect()
    }
}
