//! Bounded-variable revised primal simplex.
//!
//! Every row `a·x (<=|>=|=) b` gets a slack `s` with `a·x + s = b`, bounded by
//! the row sense, so the all-slack basis is always available. The basis inverse
//! is kept in product form (eta file) and rebuilt from the identity on a fixed
//! cadence. Phase 1 minimises the sum of bound infeasibilities of the basic
//! variables, which lets any basis (including a stale warm start) be used as a
//! starting point.

use std::time::Instant;

use super::{LinearModel, Sense};

/// Feasibility tolerance used while pivoting.
const PRIMAL_TOL: f64 = 1e-8;
/// Reduced-cost tolerance.
const DUAL_TOL: f64 = 1e-9;
/// Smallest acceptable pivot element.
const PIVOT_TOL: f64 = 1e-9;
const DROP_TOL: f64 = 1e-13;
/// Relative size of the bound shifts used against stalling.
const PERTURBATION: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
    NumericalFailure,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum VarState {
    Basic,
    Lower,
    Upper,
    /// Nonbasic free variable held at zero.
    Free,
}

/// Final basis of a solve; feed it back to [`solve_lp_with`] to warm-start.
///
/// A basis taken from a smaller model stays usable after rows or columns are
/// appended: new slacks enter basic, new columns start at a bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Basis {
    n: usize,
    m: usize,
    states: Vec<VarState>,
}

#[derive(Clone, Debug)]
pub struct LpOptions {
    pub max_iterations: Option<usize>,
    /// Eta-file length that triggers a fresh factorisation.
    pub refactor_interval: usize,
    /// Give up with [`LpStatus::IterationLimit`] once this instant passes.
    pub deadline: Option<Instant>,
}

impl Default for LpOptions {
    fn default() -> Self {
        Self {
            max_iterations: None,
            refactor_interval: 100,
            deadline: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Structural variable values.
    pub values: Vec<f64>,
    /// One dual per row: the rate of change of the optimum per unit of rhs.
    pub duals: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub basis: Option<Basis>,
}

impl LpSolution {
    fn failed(status: LpStatus, n: usize, m: usize, iterations: usize) -> Self {
        Self {
            status,
            values: vec![0.0; n],
            duals: vec![0.0; m],
            objective: f64::NAN,
            iterations,
            basis: None,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

pub fn solve_lp(model: &LinearModel) -> LpSolution {
    solve_lp_with(model, None, None, &LpOptions::default())
}

/// Solves `model`, optionally overriding variable bounds and warm-starting from `warm`.
pub fn solve_lp_with(
    model: &LinearModel,
    bounds: Option<(&[f64], &[f64])>,
    warm: Option<&Basis>,
    options: &LpOptions,
) -> LpSolution {
    let mut simplex = Simplex::new(model, bounds);
    if let Some(basis) = warm {
        simplex.adopt(basis);
    }
    simplex.run(options)
}

struct Eta {
    pos: usize,
    pivot: f64,
    entries: Vec<(usize, f64)>,
}

struct Simplex<'a> {
    model: &'a LinearModel,
    n: usize,
    m: usize,
    lo: Vec<f64>,
    up: Vec<f64>,
    cost: Vec<f64>,
    rhs: Vec<f64>,
    x: Vec<f64>,
    state: Vec<VarState>,
    head: Vec<usize>,
    etas: Vec<Eta>,
    /// Length of the eta file right after the last refactorisation.
    base_etas: usize,
    /// True bounds while `lo`/`up` hold a perturbed copy.
    saved_bounds: Option<(Vec<f64>, Vec<f64>)>,
}

impl<'a> Simplex<'a> {
    fn new(model: &'a LinearModel, bounds: Option<(&[f64], &[f64])>) -> Self {
        let n = model.num_vars();
        let m = model.num_rows();
        let mut lo = Vec::with_capacity(n + m);
        let mut up = Vec::with_capacity(n + m);
        match bounds {
            Some((l, u)) => {
                lo.extend_from_slice(&l[..n]);
                up.extend_from_slice(&u[..n]);
            }
            None => {
                lo.extend(model.vars().iter().map(|v| v.lower));
                up.extend(model.vars().iter().map(|v| v.upper));
            }
        }
        for row in model.rows() {
            let (l, u) = match row.sense {
                Sense::Le => (0.0, f64::INFINITY),
                Sense::Ge => (f64::NEG_INFINITY, 0.0),
                Sense::Eq => (0.0, 0.0),
            };
            lo.push(l);
            up.push(u);
        }
        let mut cost: Vec<f64> = model.vars().iter().map(|v| v.objective).collect();
        cost.resize(n + m, 0.0);
        let rhs = model.rows().iter().map(|r| r.rhs).collect();
        let mut state = Vec::with_capacity(n + m);
        for j in 0..n {
            state.push(default_nonbasic(lo[j], up[j]));
        }
        state.resize(n + m, VarState::Basic);
        Self {
            model,
            n,
            m,
            lo,
            up,
            cost,
            rhs,
            x: vec![0.0; n + m],
            state,
            head: (n..n + m).collect(),
            etas: Vec::new(),
            base_etas: 0,
            saved_bounds: None,
        }
    }

    fn adopt(&mut self, basis: &Basis) {
        if basis.n > self.n || basis.m > self.m {
            return;
        }
        let mut state = self.state.clone();
        state[..basis.n].copy_from_slice(&basis.states[..basis.n]);
        for i in 0..basis.m {
            state[self.n + i] = basis.states[basis.n + i];
        }
        for (j, s) in state.iter_mut().enumerate() {
            let (l, u) = (self.lo[j], self.up[j]);
            *s = match *s {
                VarState::Lower if l.is_finite() => VarState::Lower,
                VarState::Upper if u.is_finite() => VarState::Upper,
                VarState::Basic => VarState::Basic,
                _ => default_nonbasic(l, u),
            };
        }
        if state.iter().filter(|&&s| s == VarState::Basic).count() == self.m {
            self.state = state;
        }
    }

    fn basis(&self) -> Basis {
        Basis {
            n: self.n,
            m: self.m,
            states: self.state.clone(),
        }
    }

    fn scatter(&self, j: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        if j < self.n {
            for &(i, a) in self.model.column(j) {
                out[i] = a;
            }
        } else {
            out[j - self.n] = 1.0;
        }
    }

    fn dot(&self, j: usize, y: &[f64]) -> f64 {
        if j < self.n {
            self.model.column(j).iter().map(|&(i, a)| a * y[i]).sum()
        } else {
            y[j - self.n]
        }
    }

    fn ftran(&self, v: &mut [f64]) {
        for eta in &self.etas {
            let t = v[eta.pos];
            if t != 0.0 {
                let t = t / eta.pivot;
                v[eta.pos] = t;
                for &(i, a) in &eta.entries {
                    v[i] -= a * t;
                }
            }
        }
    }

    fn btran(&self, y: &mut [f64]) {
        for eta in self.etas.iter().rev() {
            let mut s = y[eta.pos];
            for &(i, a) in &eta.entries {
                s -= a * y[i];
            }
            y[eta.pos] = s / eta.pivot;
        }
    }

    fn push_eta(&mut self, pos: usize, alpha: &[f64]) {
        let entries = alpha
            .iter()
            .enumerate()
            .filter(|&(i, a)| i != pos && a.abs() > DROP_TOL)
            .map(|(i, &a)| (i, a))
            .collect();
        self.etas.push(Eta {
            pos,
            pivot: alpha[pos],
            entries,
        });
    }

    /// Rebuilds the eta file for the current set of basic variables, starting
    /// from the all-slack identity. Structurals that cannot be pivoted in are
    /// sent back to a bound and replaced by the displaced slack.
    fn reinvert(&mut self) {
        self.etas.clear();
        let (n, m) = (self.n, self.m);
        let mut head: Vec<usize> = (n..n + m).collect();
        let mut free_pos: Vec<bool> = (0..m).map(|i| self.state[n + i] != VarState::Basic).collect();
        let mut structurals: Vec<usize> = (0..n).filter(|&j| self.state[j] == VarState::Basic).collect();
        structurals.sort_by_key(|&j| (self.model.column(j).len(), j));
        let mut work = vec![0.0; m];
        for j in structurals {
            self.scatter(j, &mut work);
            self.ftran(&mut work);
            let best = (0..m)
                .filter(|&p| free_pos[p])
                .max_by(|&a, &b| work[a].abs().total_cmp(&work[b].abs()).then(b.cmp(&a)));
            match best {
                Some(p) if work[p].abs() > PIVOT_TOL => {
                    self.push_eta(p, &work);
                    head[p] = j;
                    free_pos[p] = false;
                }
                _ => {
                    self.state[j] = default_nonbasic(self.lo[j], self.up[j]);
                }
            }
        }
        for p in 0..m {
            if free_pos[p] {
                self.state[n + p] = VarState::Basic;
            }
        }
        self.head = head;
        self.base_etas = self.etas.len();
        self.compute_primal();
    }

    fn compute_primal(&mut self) {
        for j in 0..self.n + self.m {
            match self.state[j] {
                VarState::Lower => self.x[j] = self.lo[j],
                VarState::Upper => self.x[j] = self.up[j],
                VarState::Free => self.x[j] = 0.0,
                VarState::Basic => {}
            }
        }
        let mut r = self.rhs.clone();
        for j in 0..self.n + self.m {
            if self.state[j] == VarState::Basic {
                continue;
            }
            let v = self.x[j];
            if v == 0.0 {
                continue;
            }
            if j < self.n {
                for &(i, a) in self.model.column(j) {
                    r[i] -= a * v;
                }
            } else {
                r[j - self.n] -= v;
            }
        }
        self.ftran(&mut r);
        for (p, &j) in self.head.iter().enumerate() {
            self.x[j] = r[p];
        }
    }

    /// Widens every finite bound by a small amount that differs per variable,
    /// so a degenerate vertex splits into nearby non-degenerate ones.
    fn perturb(&mut self) {
        self.saved_bounds = Some((self.lo.clone(), self.up.clone()));
        for j in 0..self.n + self.m {
            let h = (j as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) >> 40;
            let delta = PERTURBATION * (1.0 + h as f64 / (1u64 << 24) as f64);
            if self.lo[j].is_finite() {
                self.lo[j] -= delta * (1.0 + self.lo[j].abs());
            }
            if self.up[j].is_finite() {
                self.up[j] += delta * (1.0 + self.up[j].abs());
            }
        }
        self.compute_primal();
    }

    fn restore_bounds(&mut self) {
        if let Some((lo, up)) = self.saved_bounds.take() {
            self.lo = lo;
            self.up = up;
            for j in 0..self.n + self.m {
                if self.state[j] == VarState::Free && (self.lo[j].is_finite() || self.up[j].is_finite()) {
                    self.state[j] = default_nonbasic(self.lo[j], self.up[j]);
                }
            }
            self.reinvert();
        }
    }

    /// Phase-1 costs for the basic variables, or `None` when primal feasible.
    fn infeasibility_costs(&self) -> Option<Vec<f64>> {
        let mut any = false;
        let costs = self
            .head
            .iter()
            .map(|&j| {
                if self.x[j] < self.lo[j] - PRIMAL_TOL {
                    any = true;
                    1.0
                } else if self.x[j] > self.up[j] + PRIMAL_TOL {
                    any = true;
                    -1.0
                } else {
                    0.0
                }
            })
            .collect();
        any.then_some(costs)
    }

    fn run(mut self, options: &LpOptions) -> LpSolution {
        let (n, m) = (self.n, self.m);
        let max_iter = options.max_iterations.unwrap_or(50 * (n + m) + 10_000);
        let bland_after = 3 * (n + m);
        let perturb_after = 50 + (n + m) / 20;
        let mut perturbed_once = false;
        self.reinvert();

        let mut iterations = 0;
        let mut degenerate_run = 0;
        let mut fresh = true;
        let mut y = vec![0.0; m];
        let mut alpha = vec![0.0; m];
        loop {
            let late = iterations % 64 == 63 && options.deadline.is_some_and(|d| Instant::now() >= d);
            if iterations >= max_iter || late {
                return LpSolution::failed(LpStatus::IterationLimit, n, m, iterations);
            }
            if !perturbed_once && degenerate_run > perturb_after {
                self.perturb();
                perturbed_once = true;
                degenerate_run = 0;
            }
            if self.etas.len() - self.base_etas > options.refactor_interval {
                self.reinvert();
                fresh = true;
            }
            let bland = degenerate_run > bland_after;
            let phase1 = self.infeasibility_costs();
            match &phase1 {
                Some(c) => y.copy_from_slice(c),
                None => {
                    for (p, &j) in self.head.iter().enumerate() {
                        y[p] = self.cost[j];
                    }
                }
            }
            self.btran(&mut y);

            // Pricing: Dantzig's rule, or Bland's after a long degenerate run.
            let mut entering: Option<(usize, f64)> = None;
            let mut best_score = 0.0;
            for j in 0..n + m {
                let s = self.state[j];
                if s == VarState::Basic || self.lo[j] == self.up[j] {
                    continue;
                }
                let c = if phase1.is_some() { 0.0 } else { self.cost[j] };
                let d = c - self.dot(j, &y);
                let dir = if d > DUAL_TOL && matches!(s, VarState::Lower | VarState::Free) {
                    1.0
                } else if d < -DUAL_TOL && matches!(s, VarState::Upper | VarState::Free) {
                    -1.0
                } else {
                    continue;
                };
                if bland {
                    entering = Some((j, dir));
                    break;
                }
                if d.abs() > best_score {
                    best_score = d.abs();
                    entering = Some((j, dir));
                }
            }

            let Some((q, dir)) = entering else {
                // Confirm on a fresh factorisation before reporting.
                if self.saved_bounds.is_some() {
                    self.restore_bounds();
                    fresh = true;
                    degenerate_run = 0;
                    continue;
                }
                if !fresh {
                    self.reinvert();
                    fresh = true;
                    continue;
                }
                if phase1.is_some() {
                    return LpSolution::failed(LpStatus::Infeasible, n, m, iterations);
                }
                return self.finish(y, iterations);
            };

            self.scatter(q, &mut alpha);
            self.ftran(&mut alpha);

            // Ratio test. Infeasible basics block where they become feasible.
            let mut theta = self.up[q] - self.lo[q];
            let mut leave: Option<(usize, f64)> = None;
            let mut leave_alpha = 0.0;
            for p in 0..m {
                let a = alpha[p];
                if a.abs() < PIVOT_TOL {
                    continue;
                }
                let j = self.head[p];
                let rate = -dir * a;
                let v = self.x[j];
                let target = if rate < 0.0 {
                    if v > self.up[j] + PRIMAL_TOL {
                        self.up[j]
                    } else if v >= self.lo[j] - PRIMAL_TOL && self.lo[j].is_finite() {
                        self.lo[j]
                    } else {
                        continue;
                    }
                } else if v < self.lo[j] - PRIMAL_TOL {
                    self.lo[j]
                } else if v <= self.up[j] + PRIMAL_TOL && self.up[j].is_finite() {
                    self.up[j]
                } else {
                    continue;
                };
                let t = ((target - v) / rate).max(0.0);
                let better = match leave {
                    _ if t < theta - 1e-12 => true,
                    Some((lp, _)) if (t - theta).abs() <= 1e-12 => {
                        if bland {
                            j < self.head[lp]
                        } else {
                            a.abs() > leave_alpha
                        }
                    }
                    _ => false,
                };
                if better {
                    theta = t;
                    leave = Some((p, target));
                    leave_alpha = a.abs();
                }
            }

            if theta.is_infinite() {
                if phase1.is_some() {
                    return LpSolution::failed(LpStatus::NumericalFailure, n, m, iterations);
                }
                return LpSolution::failed(LpStatus::Unbounded, n, m, iterations);
            }

            iterations += 1;
            fresh = false;
            if theta < 1e-11 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }

            let step = dir * theta;
            if step != 0.0 {
                self.x[q] += step;
                for p in 0..m {
                    if alpha[p] != 0.0 {
                        let j = self.head[p];
                        self.x[j] -= step * alpha[p];
                    }
                }
            }
            match leave {
                None => {
                    // Bound flip.
                    let s = self.state[q];
                    let (state, val) = if s == VarState::Upper || (s == VarState::Free && dir < 0.0) {
                        (VarState::Lower, self.lo[q])
                    } else {
                        (VarState::Upper, self.up[q])
                    };
                    self.state[q] = state;
                    self.x[q] = val;
                }
                Some((p, target)) => {
                    let j = self.head[p];
                    self.x[j] = target;
                    self.state[j] = if target == self.lo[j] {
                        VarState::Lower
                    } else {
                        VarState::Upper
                    };
                    self.state[q] = VarState::Basic;
                    self.head[p] = q;
                    self.push_eta(p, &alpha);
                }
            }
        }
    }

    fn finish(self, y: Vec<f64>, iterations: usize) -> LpSolution {
        let values = self.x[..self.n].to_vec();
        let objective = self.model.objective_value(&values);
        if !objective.is_finite() {
            return LpSolution::failed(LpStatus::NumericalFailure, self.n, self.m, iterations);
        }
        LpSolution {
            status: LpStatus::Optimal,
            values,
            duals: y,
            objective,
            iterations,
            basis: Some(self.basis()),
        }
    }
}

fn default_nonbasic(lo: f64, up: f64) -> VarState {
    if lo.is_finite() {
        VarState::Lower
    } else if up.is_finite() {
        VarState::Upper
    } else {
        VarState::Free
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{Sense, TOL_FEAS};

    #[test]
    fn single_bounded_variable() {
        let mut m = LinearModel::new();
        let x = m.add_continuous("x", 0.0, 10.0, 1.0);
        m.add_row("cap", [(x, 1.0)], Sense::Le, 5.0);
        let s = solve_lp(&m);
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.values[0] - 5.0).abs() < 1e-9);
        assert!((s.duals[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn contradictory_rows_are_infeasible() {
        let mut m = LinearModel::new();
        let x = m.add_continuous("x", 0.0, 10.0, 1.0);
        m.add_row("a", [(x, 1.0)], Sense::Le, 1.0);
        m.add_row("b", [(x, 1.0)], Sense::Ge, 2.0);
        assert_eq!(solve_lp(&m).status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_ray() {
        let mut m = LinearModel::new();
        let x = m.add_continuous("x", 0.0, f64::INFINITY, 1.0);
        let y = m.add_continuous("y", 0.0, f64::INFINITY, 0.0);
        m.add_row("r", [(x, 1.0), (y, -1.0)], Sense::Le, 1.0);
        assert_eq!(solve_lp(&m).status, LpStatus::Unbounded);
    }

    #[test]
    fn equality_and_free_variables() {
        // max x - y, x + y = 4, x - 2y >= -2, y free, x in [0, 3]
        let mut m = LinearModel::new();
        let x = m.add_continuous("x", 0.0, 3.0, 1.0);
        let y = m.add_continuous("y", f64::NEG_INFINITY, f64::INFINITY, -1.0);
        m.add_row("e", [(x, 1.0), (y, 1.0)], Sense::Eq, 4.0);
        m.add_row("g", [(x, 1.0), (y, -2.0)], Sense::Ge, -2.0);
        let s = solve_lp(&m);
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.values[0] - 3.0).abs() < 1e-9 && (s.values[1] - 1.0).abs() < 1e-9);
        assert!((s.objective - 2.0).abs() < 1e-9);
        assert!(m.max_violation(&s.values) < TOL_FEAS);
    }

    #[test]
    fn warm_start_after_adding_a_row() {
        let mut m = LinearModel::new();
        let x = m.add_continuous("x", 0.0, 10.0, 3.0);
        let y = m.add_continuous("y", 0.0, 10.0, 2.0);
        m.add_row("a", [(x, 1.0), (y, 1.0)], Sense::Le, 8.0);
        let first = solve_lp(&m);
        assert!((first.objective - 24.0).abs() < 1e-9);
        m.add_row("b", [(x, 1.0)], Sense::Le, 2.0);
        let second = solve_lp_with(&m, None, first.basis.as_ref(), &LpOptions::default());
        assert_eq!(second.status, LpStatus::Optimal);
        assert!((second.objective - 18.0).abs() < 1e-9);
        assert!((second.duals[1] - 1.0).abs() < 1e-9);
    }
}
