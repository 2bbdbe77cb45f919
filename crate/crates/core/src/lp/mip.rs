use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use super::simplex::{solve_lp_with, Basis, LpOptions, LpStatus};
use super::{LinearModel, ModelError, Sense, VarId, TOL_FEAS, TOL_GAP, TOL_INT};

/// A constraint returned by a lazy callback.
#[derive(Clone, Debug, PartialEq)]
pub struct LazyRow {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl LazyRow {
    fn violation(&self, values: &[f64]) -> f64 {
        let lhs: f64 = self.terms.iter().map(|&(v, a)| a * values[v.0]).sum();
        match self.sense {
            Sense::Le => lhs - self.rhs,
            Sense::Ge => self.rhs - lhs,
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct MipOptions {
    pub time_limit: Option<Duration>,
    pub node_limit: Option<usize>,
    /// Warm start for the root relaxation.
    pub root_basis: Option<Basis>,
    pub lp: LpOptions,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MipStatus {
    Optimal,
    Infeasible,
    Unbounded,
    TimeLimit,
    NodeLimit,
    NumericalFailure,
}

#[derive(Clone, Debug)]
pub struct MipSolution {
    pub status: MipStatus,
    pub values: Option<Vec<f64>>,
    /// Incumbent objective, `-inf` without an incumbent.
    pub objective: f64,
    /// Best proven upper bound.
    pub bound: f64,
    pub nodes: usize,
    pub cuts_added: usize,
    pub lp_iterations: usize,
    pub root_basis: Option<Basis>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MipError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("lazy row {name} is not violated by the candidate it was generated for (violation {violation:e})")]
    UnsoundCut { name: String, violation: f64 },
}

struct Node {
    id: usize,
    bound: f64,
    changes: Vec<(usize, f64, f64)>,
    basis: Option<Basis>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // Best bound first, then lowest id.
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound
            .total_cmp(&other.bound)
            .then_with(|| other.id.cmp(&self.id))
    }
}

fn improves(value: f64, incumbent: f64) -> bool {
    if incumbent == f64::NEG_INFINITY {
        return true;
    }
    value > incumbent + TOL_GAP * (1.0 + incumbent.abs())
}

/// Branch and bound over the integer variables of `model`.
///
/// Every LP-feasible point that is integral is passed to `on_candidate`. Rows
/// it returns are added to `model` for good (all open nodes see them) and the
/// node is re-solved; a candidate becomes the incumbent only once the callback
/// returns nothing. A returned row that the candidate does not violate is an
/// error.
pub fn solve_mip(
    model: &mut LinearModel,
    mut on_candidate: Option<&mut dyn FnMut(&LinearModel, &[f64]) -> Vec<LazyRow>>,
    options: &MipOptions,
) -> Result<MipSolution, MipError> {
    model.check()?;
    let start = Instant::now();
    let deadline = options.time_limit.map(|t| start + t);
    let lp_options = LpOptions {
        deadline,
        ..options.lp.clone()
    };
    let expired = || deadline.is_some_and(|d| Instant::now() >= d);
    let root_lower: Vec<f64> = model.vars().iter().map(|v| v.lower).collect();
    let root_upper: Vec<f64> = model.vars().iter().map(|v| v.upper).collect();
    let integers: Vec<usize> = (0..model.num_vars()).filter(|&j| model.vars()[j].integer).collect();

    let mut heap = BinaryHeap::new();
    heap.push(Node {
        id: 0,
        bound: f64::INFINITY,
        changes: Vec::new(),
        basis: options.root_basis.clone(),
    });
    let mut next_id = 1;
    let mut nodes = 0;
    let mut cuts_added = 0;
    let mut lp_iterations = 0;
    let mut incumbent: Option<Vec<f64>> = None;
    let mut incumbent_obj = f64::NEG_INFINITY;
    let mut root_basis = None;
    let mut limit_hit: Option<(MipStatus, f64)> = None;

    // Until the first incumbent, dive depth-first along up-branches.
    let mut dive: Vec<Node> = Vec::new();
    'search: loop {
        if incumbent.is_some() && !dive.is_empty() {
            heap.extend(dive.drain(..));
        }
        let Some(node) = dive.pop().or_else(|| heap.pop()) else { break };
        if !improves(node.bound, incumbent_obj) {
            if incumbent.is_some() {
                break;
            }
            continue;
        }
        if expired() {
            limit_hit = Some((MipStatus::TimeLimit, node.bound));
            break;
        }
        if options.node_limit.is_some_and(|l| nodes >= l) {
            limit_hit = Some((MipStatus::NodeLimit, node.bound));
            break;
        }
        nodes += 1;
        let mut lower = root_lower.clone();
        let mut upper = root_upper.clone();
        for &(j, l, u) in &node.changes {
            lower[j] = l;
            upper[j] = u;
        }
        let mut basis = node.basis;
        loop {
            let mut lp = solve_lp_with(model, Some((&lower, &upper)), basis.as_ref(), &lp_options);
            if matches!(lp.status, LpStatus::NumericalFailure | LpStatus::IterationLimit) && basis.is_some() && !expired() {
                lp = solve_lp_with(model, Some((&lower, &upper)), None, &lp_options);
            }
            lp_iterations += lp.iterations;
            if lp.status == LpStatus::IterationLimit && expired() {
                limit_hit = Some((MipStatus::TimeLimit, node.bound));
                break 'search;
            }
            match lp.status {
                LpStatus::Optimal => {}
                LpStatus::Infeasible => break,
                LpStatus::Unbounded => {
                    return Ok(MipSolution {
                        status: MipStatus::Unbounded,
                        values: None,
                        objective: f64::NEG_INFINITY,
                        bound: f64::INFINITY,
                        nodes,
                        cuts_added,
                        lp_iterations,
                        root_basis,
                    });
                }
                LpStatus::NumericalFailure | LpStatus::IterationLimit => {
                    return Ok(MipSolution {
                        status: MipStatus::NumericalFailure,
                        values: incumbent,
                        objective: incumbent_obj,
                        bound: f64::INFINITY,
                        nodes,
                        cuts_added,
                        lp_iterations,
                        root_basis,
                    });
                }
            }
            if node.id == 0 && root_basis.is_none() {
                root_basis = lp.basis.clone();
            }
            if !improves(lp.objective, incumbent_obj) {
                break;
            }
            let branch = integers
                .iter()
                .map(|&j| {
                    let v = lp.values[j];
                    (j, v, (v - v.floor()).min(v.ceil() - v))
                })
                .filter(|&(_, _, f)| f > TOL_INT)
                .fold(None, |best: Option<(usize, f64, f64)>, c| match best {
                    Some(b) if b.2 >= c.2 => Some(b),
                    _ => Some(c),
                });
            if let Some((j, v, _)) = branch {
                let mut down = node.changes.clone();
                down.push((j, lower[j], v.floor()));
                let mut up = node.changes.clone();
                up.push((j, v.ceil(), upper[j]));
                for (k, changes) in [down, up].into_iter().enumerate() {
                    let child = Node {
                        id: next_id,
                        bound: lp.objective,
                        changes,
                        basis: lp.basis.clone(),
                    };
                    next_id += 1;
                    if incumbent.is_none() && k == 1 {
                        dive.push(child);
                    } else {
                        heap.push(child);
                    }
                }
                break;
            }

            let mut candidate = lp.values;
            for &j in &integers {
                candidate[j] = candidate[j].round();
            }
            let rows = match on_candidate.as_mut() {
                Some(cb) => cb(model, &candidate),
                None => Vec::new(),
            };
            if rows.is_empty() {
                let obj = model.objective_value(&candidate);
                if improves(obj, incumbent_obj) || incumbent.is_none() {
                    incumbent_obj = obj;
                    incumbent = Some(candidate);
                }
                break;
            }
            for row in rows {
                let violation = row.violation(&candidate);
                if violation <= TOL_FEAS {
                    return Err(MipError::UnsoundCut {
                        name: row.name,
                        violation,
                    });
                }
                model.add_row(row.name, row.terms, row.sense, row.rhs);
                cuts_added += 1;
            }
            basis = lp.basis;
        }
    }

    let (status, bound) = match limit_hit {
        Some((status, node_bound)) => {
            let open = heap.iter().chain(&dive).map(|n| n.bound).fold(node_bound, f64::max);
            (status, open.max(incumbent_obj))
        }
        None if incumbent.is_some() => (MipStatus::Optimal, incumbent_obj),
        None => (MipStatus::Infeasible, f64::NEG_INFINITY),
    };
    Ok(MipSolution {
        status,
        values: incumbent,
        objective: incumbent_obj,
        bound,
        nodes,
        cuts_added,
        lp_iterations,
        root_basis,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integral_relaxation_needs_only_the_root() {
        let mut m = LinearModel::new();
        let x = m.add_var("x", 0.0, 4.0, 1.0, true);
        let y = m.add_var("y", 0.0, 4.0, 1.0, true);
        m.add_row("r", [(x, 1.0), (y, 1.0)], Sense::Le, 3.0);
        let s = solve_mip(&mut m, None, &MipOptions::default()).unwrap();
        assert_eq!(s.status, MipStatus::Optimal);
        assert_eq!(s.nodes, 1);
        assert!((s.objective - 3.0).abs() < 1e-9);
    }

    #[test]
    fn small_knapsack() {
        // max 10x + 9y, 5x + 5y <= 5, binary: only one item fits.
        let mut m = LinearModel::new();
        let x = m.add_binary("x", 10.0);
        let y = m.add_binary("y", 9.0);
        m.add_row("w", [(x, 5.0), (y, 5.0)], Sense::Le, 5.0);
        let s = solve_mip(&mut m, None, &MipOptions::default()).unwrap();
        assert_eq!(s.status, MipStatus::Optimal);
        assert!((s.objective - 10.0).abs() < 1e-9);
        assert_eq!(s.values.unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn lazy_cut_rejects_candidate() {
        // max x + y over binaries; the callback forbids taking both.
        let mut m = LinearModel::new();
        let x = m.add_binary("x", 1.0);
        let y = m.add_binary("y", 1.0);
        let mut calls = 0;
        let mut cb = |_: &LinearModel, v: &[f64]| {
            calls += 1;
            if v[0] + v[1] > 1.5 {
                vec![LazyRow {
                    name: "pair".into(),
                    terms: vec![(x, 1.0), (y, 1.0)],
                    sense: Sense::Le,
                    rhs: 1.0,
                }]
            } else {
                vec![]
            }
        };
        let s = solve_mip(&mut m, Some(&mut cb), &MipOptions::default()).unwrap();
        assert_eq!(s.status, MipStatus::Optimal);
        assert_eq!(s.cuts_added, 1);
        let v = s.values.unwrap();
        assert!(v[0] + v[1] <= 1.0 + 1e-9);
        assert!((s.objective - 1.0).abs() < 1e-9);
        assert_eq!(m.num_rows(), 1);
        assert!(calls >= 2);
    }

    #[test]
    fn satisfied_cut_is_an_error() {
        let mut m = LinearModel::new();
        let x = m.add_binary("x", 1.0);
        let mut cb = |_: &LinearModel, _: &[f64]| {
            vec![LazyRow {
                name: "slack".into(),
                terms: vec![(x, 1.0)],
                sense: Sense::Le,
                rhs: 5.0,
            }]
        };
        let err = solve_mip(&mut m, Some(&mut cb), &MipOptions::default()).unwrap_err();
        assert!(matches!(err, MipError::UnsoundCut { .. }));
    }

    #[test]
    fn no_integers_is_plain_lp() {
        let mut m = LinearModel::new();
        let x = m.add_continuous("x", 0.0, 10.0, 1.0);
        let y = m.add_continuous("y", 0.0, 10.0, 1.0);
        m.add_row("r", [(x, 2.0), (y, 1.0)], Sense::Le, 3.0);
        m.add_row("s", [(x, 1.0), (y, 2.0)], Sense::Le, 3.0);
        let mip = solve_mip(&mut m, None, &MipOptions::default()).unwrap();
        let lp = crate::lp::solve_lp(&m);
        assert_eq!(mip.nodes, 1);
        assert!((mip.objective - lp.objective).abs() < 1e-12);
        assert!((mip.objective - 2.0).abs() < 1e-9);
    }
}
