//! Brute force reference solver for small instances.
//!
//! Every start-to-sink path of every ship is enumerated; for each path the
//! best cargo plan is an LP over (commodity, unload position) pairs with one
//! capacity row per leg. Node-disjoint combinations of paths are then searched
//! exhaustively. Nothing here shares code with the MIP or column generation
//! models beyond the LP engine.

use std::collections::HashMap;
use std::time::Instant;

use crate::instance::{validate, CargoType, Instance, ValidationReport};
use crate::lp::{solve_lp, LinearModel, LpStatus, Sense};
use crate::solution::{DemandFlow, EmptyFlow, Method, Solution, SolveStatus};

pub const DEFAULT_BUDGET: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("{combinations} path combinations exceed the oracle budget of {budget}")]
    OverBudget { combinations: u128, budget: u128 },
    #[error("invalid instance:\n{0}")]
    Invalid(ValidationReport),
    #[error("cargo LP on a fixed path ended with status {0:?}")]
    CargoLp(LpStatus),
}

/// One path per ship, pairwise node-disjoint apart from the sink.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathAssignment {
    pub paths: Vec<Vec<usize>>,
}

/// All start-to-sink node sequences of `ship`, in depth-first order over
/// arcs in input order. Gives up once more than `limit` are found.
pub fn ship_paths(inst: &Instance, ship: usize, limit: u128) -> Option<Vec<Vec<usize>>> {
    let out = inst.out_arcs();
    let sink = inst.sink();
    let mut paths = Vec::new();
    let mut stack = vec![(inst.ships[ship].start, 0usize)];
    let mut current = vec![inst.ships[ship].start];
    while let Some(&mut (v, ref mut next)) = stack.last_mut() {
        if v == sink {
            paths.push(current.clone());
            if paths.len() as u128 > limit {
                return None;
            }
            stack.pop();
            current.pop();
            continue;
        }
        if *next < out[v].len() {
            let w = inst.arcs[out[v][*next]].to;
            *next += 1;
            stack.push((w, 0));
            current.push(w);
        } else {
            stack.pop();
            current.pop();
        }
    }
    Some(paths)
}

fn all_paths(inst: &Instance, budget: u128) -> Result<Vec<Vec<Vec<usize>>>, OracleError> {
    let report = validate(inst);
    if !report.is_ok() {
        return Err(OracleError::Invalid(report));
    }
    let mut lists = Vec::new();
    let mut product: u128 = 1;
    for s in 0..inst.ships.len() {
        let paths = ship_paths(inst, s, budget).ok_or(OracleError::OverBudget {
            combinations: budget.saturating_add(1),
            budget,
        })?;
        product = product.saturating_mul(paths.len() as u128);
        if product > budget {
            return Err(OracleError::OverBudget {
                combinations: product,
                budget,
            });
        }
        lists.push(paths);
    }
    Ok(lists)
}

/// Calls `visit` with one path index per ship for every node-disjoint
/// combination, lexicographically by ship then path index.
fn for_each_disjoint(inst: &Instance, lists: &[Vec<Vec<usize>>], mut visit: impl FnMut(&[usize])) {
    fn rec(
        s: usize,
        lists: &[Vec<Vec<usize>>],
        sink: usize,
        used: &mut [bool],
        chosen: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize]),
    ) {
        if s == lists.len() {
            visit(chosen);
            return;
        }
        for (k, path) in lists[s].iter().enumerate() {
            if path.iter().any(|&v| v != sink && used[v]) {
                continue;
            }
            for &v in path.iter().filter(|&&v| v != sink) {
                used[v] = true;
            }
            chosen.push(k);
            rec(s + 1, lists, sink, used, chosen, visit);
            chosen.pop();
            for &v in path.iter().filter(|&&v| v != sink) {
                used[v] = false;
            }
        }
    }
    let mut used = vec![false; inst.num_nodes()];
    rec(0, lists, inst.sink(), &mut used, &mut Vec::new(), &mut visit);
}

/// Every node-disjoint path assignment, refusing when the product of
/// per-ship path counts exceeds `budget`.
pub fn enumerate_disjoint_paths(inst: &Instance, budget: u128) -> Result<Vec<PathAssignment>, OracleError> {
    let lists = all_paths(inst, budget)?;
    let mut out = Vec::new();
    for_each_disjoint(inst, &lists, |idx| {
        out.push(PathAssignment {
            paths: idx.iter().enumerate().map(|(s, &k)| lists[s][k].clone()).collect(),
        });
    });
    Ok(out)
}

enum Load {
    Demand(usize),
    Empty { surplus: usize, deficit: usize },
}

struct PathPlan {
    profit: f64,
    loads: Vec<(Load, usize, usize, f64)>,
}

/// Best cargo plan for `ship` on the fixed node sequence `path`.
fn plan_path(inst: &Instance, ship: usize, path: &[usize]) -> Result<PathPlan, OracleError> {
    let sink = inst.sink();
    let pos: HashMap<usize, usize> = path.iter().enumerate().map(|(k, &v)| (v, k)).collect();
    let s = &inst.ships[ship];
    let mut model = LinearModel::new();
    // (load, from position, to position, variable)
    let mut vars = Vec::new();
    for (m, d) in inst.demands.iter().enumerate() {
        let Some(&a) = pos.get(&d.origin) else { continue };
        for &dest in &d.destinations {
            if let Some(&b) = pos.get(&dest) {
                if b > a && dest != sink {
                    let margin = d.revenue.money() - inst.move_cost(d.origin).money() - inst.move_cost(dest).money();
                    let x = model.add_continuous(format!("{}@{}", d.id, inst.node_id(dest)), 0.0, f64::INFINITY, margin);
                    vars.push((Load::Demand(m), a, b, x));
                }
            }
        }
    }
    for (si, sp) in inst.empty_points.iter().enumerate().filter(|(_, p)| p.amount > 0) {
        let Some(&a) = pos.get(&sp.visit) else { continue };
        for (di, dp) in inst.empty_points.iter().enumerate().filter(|(_, p)| p.amount < 0) {
            if dp.cargo_type != sp.cargo_type {
                continue;
            }
            if let Some(&b) = pos.get(&dp.visit) {
                if b > a {
                    let margin = inst.empty_revenue[sp.cargo_type.index()].money()
                        - inst.move_cost(sp.visit).money()
                        - inst.move_cost(dp.visit).money();
                    let x = model.add_continuous(format!("e{si}_{di}"), 0.0, f64::INFINITY, margin);
                    vars.push((Load::Empty { surplus: si, deficit: di }, a, b, x));
                }
            }
        }
    }
    for t in 0..path.len().saturating_sub(1) {
        let on: Vec<_> = vars.iter().filter(|v| v.1 <= t && t < v.2).collect();
        if on.is_empty() {
            continue;
        }
        model.add_row(format!("dc{t}"), on.iter().map(|v| (v.3, 1.0)), Sense::Le, s.capacity_dc as f64);
        let plugs: Vec<_> = on
            .iter()
            .filter(|v| matches!(v.0, Load::Demand(m) if inst.demands[m].cargo_type == CargoType::Rf))
            .map(|v| (v.3, 1.0))
            .collect();
        if !plugs.is_empty() {
            model.add_row(format!("rf{t}"), plugs, Sense::Le, s.capacity_rf as f64);
        }
    }
    for (m, d) in inst.demands.iter().enumerate() {
        let terms: Vec<_> = vars
            .iter()
            .filter(|v| matches!(v.0, Load::Demand(k) if k == m))
            .map(|v| (v.3, 1.0))
            .collect();
        if !terms.is_empty() {
            model.add_row(format!("avail_{}", d.id), terms, Sense::Le, d.amount as f64);
        }
    }
    for (k, p) in inst.empty_points.iter().enumerate() {
        let terms: Vec<_> = vars
            .iter()
            .filter(|v| matches!(v.0, Load::Empty { surplus, deficit } if surplus == k || deficit == k))
            .map(|v| (v.3, 1.0))
            .collect();
        if !terms.is_empty() {
            model.add_row(format!("point{k}"), terms, Sense::Le, p.amount.unsigned_abs() as f64);
        }
    }
    let lp = solve_lp(&model);
    if lp.status != LpStatus::Optimal {
        return Err(OracleError::CargoLp(lp.status));
    }
    let mut profit = lp.objective;
    for w in path.windows(2) {
        let arc = inst
            .arcs
            .iter()
            .position(|a| a.from == w[0] && a.to == w[1])
            .expect("enumerated paths use existing arcs");
        profit -= inst.sail_cost(arc, ship).money() + inst.port_fee(w[1], ship).money();
    }
    let loads = vars
        .into_iter()
        .map(|(load, a, b, x)| (load, path[a], path[b], lp.values[x.0]))
        .collect();
    Ok(PathPlan { profit, loads })
}

/// Exact optimum by enumeration.
pub fn brute_force_solve(inst: &Instance, budget: u128) -> Result<Solution, OracleError> {
    let start = Instant::now();
    let lists = all_paths(inst, budget)?;
    let mut plans: Vec<Vec<Option<PathPlan>>> = lists.iter().map(|l| l.iter().map(|_| None).collect()).collect();
    let mut error = None;
    let mut best: Option<(f64, Vec<usize>)> = None;
    for_each_disjoint(inst, &lists, |idx| {
        if error.is_some() {
            return;
        }
        let mut total = 0.0;
        for (s, &k) in idx.iter().enumerate() {
            if plans[s][k].is_none() {
                match plan_path(inst, s, &lists[s][k]) {
                    Ok(p) => plans[s][k] = Some(p),
                    Err(e) => {
                        error = Some(e);
                        return;
                    }
                }
            }
            total += plans[s][k].as_ref().unwrap().profit;
        }
        if best.as_ref().is_none_or(|(b, _)| total > *b) {
            best = Some((total, idx.to_vec()));
        }
    });
    if let Some(e) = error {
        return Err(e);
    }
    let mut sol = match best {
        None => Solution::without_routing(Method::Oracle, SolveStatus::Infeasible, inst.ships.len()),
        Some((objective, idx)) => {
            let mut sol = Solution::without_routing(Method::Oracle, SolveStatus::Optimal, inst.ships.len());
            sol.objective = objective;
            sol.bound = objective;
            for (s, &k) in idx.iter().enumerate() {
                sol.paths[s] = lists[s][k].clone();
                for &(ref load, from, to, amount) in &plans[s][k].as_ref().unwrap().loads {
                    if amount <= 1e-9 {
                        continue;
                    }
                    match *load {
                        Load::Demand(m) => sol.demand_flows.push(DemandFlow {
                            ship: s,
                            demand: m,
                            destination: to,
                            amount,
                        }),
                        Load::Empty { surplus, .. } => sol.empty_flows.push(EmptyFlow {
                            ship: s,
                            cargo_type: inst.empty_points[surplus].cargo_type,
                            from,
                            to,
                            amount,
                        }),
                    }
                }
            }
            sol
        }
    };
    sol.wall_seconds = start.elapsed().as_secs_f64();
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::solution::{evaluate_objective, verify_solution};

    #[test]
    fn t1_has_four_paths_and_optimum_676() {
        let inst = fixtures::t1();
        let all = enumerate_disjoint_paths(&inst, DEFAULT_BUDGET).unwrap();
        assert_eq!(all.len(), 4);
        let sol = brute_force_solve(&inst, DEFAULT_BUDGET).unwrap();
        assert!((sol.objective - 676.0).abs() < 1e-9);
        assert_eq!(sol.paths[0], vec![0, 1, 2, 3]);
        assert!((evaluate_objective(&inst, &sol).unwrap() - 676.0).abs() < 1e-9);
        assert!(verify_solution(&inst, &sol).is_empty());
    }

    #[test]
    fn shared_node_is_never_assigned_twice() {
        let inst = fixtures::shared_corridor();
        for a in enumerate_disjoint_paths(&inst, DEFAULT_BUDGET).unwrap() {
            assert!(!(a.paths[0].contains(&2) && a.paths[1].contains(&2)));
        }
    }

    #[test]
    fn budget_refusal() {
        let inst = fixtures::pure_repositioning();
        // 2 paths per ship: 4 combinations.
        assert!(matches!(
            brute_force_solve(&inst, 3),
            Err(OracleError::OverBudget { .. })
        ));
        assert!(brute_force_solve(&inst, 4).is_ok());
    }

    #[test]
    fn fixtures_by_hand() {
        for (inst, expected) in [
            (fixtures::overload_1(), 1270.0),
            (fixtures::reefer_pair(), 910.0),
            (fixtures::figure3(), 960.0),
            (fixtures::late_second_destination(), 970.0),
            (fixtures::strict_gap(), 0.0),
            // a-c-tau is 10 + 5 fee: -15 plus 30 * (20 - 1) = 555; b goes home.
            (fixtures::shared_corridor(), 555.0),
            // a-d (20 + 3), b-c (12 + 7).
            (fixtures::pure_repositioning(), -42.0),
            (fixtures::fractional_master(), -20.0),
            (fixtures::empties(), 9730.0),
            (fixtures::empties().with_empty_revenue(crate::instance::Cents(30000)), 12170.0),
        ] {
            let sol = brute_force_solve(&inst, DEFAULT_BUDGET).unwrap();
            assert!((sol.objective - expected).abs() < 1e-6, "{}: {}", inst.name, sol.objective);
            assert!(verify_solution(&inst, &sol).is_empty(), "{}", inst.name);
            assert!((evaluate_objective(&inst, &sol).unwrap() - sol.objective).abs() < 1e-6);
        }
    }
}
