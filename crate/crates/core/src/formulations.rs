//! Arc-flow MIP models: the reduced model with aggregated cargo flows, its
//! tightened variant, and the revised model with per-ship cargo flows.
//!
//! Cargo that reaches a destination may continue to a later destination of
//! the same commodity, so revenue is booked on net inflow at each destination
//! and outflow from a destination is capped by its inflow.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use crate::instance::{CommodityKind, Instance, ReachIndex};
use crate::lp::{solve_lp, solve_mip, LinearModel, MipError, MipOptions, MipStatus, Sense, VarId};
use crate::solution::{DemandFlow, EmptyFlow, Method, Solution, SolveStatus};

pub use crate::solution::{evaluate_objective, verify_solution};

/// Handles of the routing and cargo variables of an arc-flow model.
#[derive(Clone, Debug, Default)]
pub struct ArcFlowVars {
    /// `y[s][arc]`, absent where ship `s` cannot sail the arc.
    pub y: Vec<Vec<Option<VarId>>>,
    /// Cargo variables keyed by (ship, arc, commodity); the ship is `None`
    /// in the reduced model.
    pub x: HashMap<(Option<usize>, usize, usize), VarId>,
    /// Ships covered by `y`, in order.
    pub ships: Vec<usize>,
}

impl ArcFlowVars {
    pub fn y(&self, ship: usize, arc: usize) -> Option<VarId> {
        self.y[ship][arc]
    }
}

fn arc_name(inst: &Instance, k: usize) -> String {
    let a = &inst.arcs[k];
    format!("{}->{}", inst.node_id(a.from), inst.node_id(a.to))
}

/// Routing variables and rows for `ships`: start, conservation and sink
/// rows per ship, and node-once rows when `node_once` is set.
pub(crate) fn add_routing(model: &mut LinearModel, inst: &Instance, reach: &ReachIndex, ships: &[usize], node_once: bool) -> Vec<Vec<Option<VarId>>> {
    let mut y = vec![vec![None; inst.arcs.len()]; inst.ships.len()];
    for &s in ships {
        for k in reach.ship_arcs(inst, s) {
            let a = &inst.arcs[k];
            let cost = inst.sail_cost(k, s).money() + inst.port_fee(a.to, s).money();
            let v = model.add_binary(format!("y[{},{}]", inst.ships[s].id, arc_name(inst, k)), -cost);
            y[s][k] = Some(v);
        }
    }
    let sink = inst.sink();
    let yr = &y;
    if node_once {
        for j in 0..sink {
            let terms: Vec<_> = ships
                .iter()
                .flat_map(|&s| reach.in_arcs[j].iter().filter_map(move |&k| yr[s][k]))
                .map(|v| (v, 1.0))
                .collect();
            if terms.len() > 1 {
                model.add_row(format!("once[{}]", inst.node_id(j)), terms, Sense::Le, 1.0);
            }
        }
    }
    for &s in ships {
        let start = inst.ships[s].start;
        let out: Vec<_> = reach.out_arcs[start].iter().filter_map(|&k| y[s][k]).map(|v| (v, 1.0)).collect();
        model.add_row(format!("start[{}]", inst.ships[s].id), out, Sense::Eq, 1.0);
        for j in 0..sink {
            if j == start || !reach.ship_nodes(&inst.ships[s])[j] {
                continue;
            }
            let terms: Vec<_> = reach.in_arcs[j]
                .iter()
                .filter_map(|&k| y[s][k])
                .map(|v| (v, 1.0))
                .chain(reach.out_arcs[j].iter().filter_map(|&k| y[s][k]).map(|v| (v, -1.0)))
                .collect();
            if !terms.is_empty() {
                model.add_row(format!("flow[{},{}]", inst.ships[s].id, inst.node_id(j)), terms, Sense::Eq, 0.0);
            }
        }
    }
    let into_sink: Vec<_> = ships
        .iter()
        .flat_map(|&s| reach.in_arcs[sink].iter().filter_map(move |&k| yr[s][k]))
        .map(|v| (v, 1.0))
        .collect();
    model.add_row("sink", into_sink, Sense::Eq, ships.len() as f64);
    y
}

/// Cargo variables and rows for one flow group: all ships together (reduced)
/// or a single ship (revised). Returns the x handles per (arc, commodity).
struct CargoGroup<'a> {
    ship: Option<usize>,
    /// Ships whose routing variables provide capacity for this group.
    carriers: &'a [usize],
    commodities: Vec<usize>,
}

fn add_cargo(
    model: &mut LinearModel,
    inst: &Instance,
    reach: &ReachIndex,
    y: &[Vec<Option<VarId>>],
    group: &CargoGroup<'_>,
    tight: bool,
    x: &mut HashMap<(Option<usize>, usize, usize), VarId>,
) {
    let tag = group.ship.map(|s| format!("{},", inst.ships[s].id)).unwrap_or_default();
    let mut per_arc: Vec<Vec<(usize, VarId)>> = vec![Vec::new(); inst.arcs.len()];
    for &c in &group.commodities {
        let com = &reach.commodities[c];
        let label = com.label(inst);
        for k in reach.commodity_arcs[c].ones() {
            let a = &inst.arcs[k];
            let mut obj = 0.0;
            if com.destinations.contains(&a.to) {
                obj += com.unit_profit(inst, a.to);
            }
            if com.destinations.contains(&a.from) {
                obj -= com.unit_profit(inst, a.from);
            }
            let v = model.add_continuous(format!("x[{tag}{label},{}]", arc_name(inst, k)), 0.0, f64::INFINITY, obj);
            x.insert((group.ship, k, c), v);
            per_arc[k].push((c, v));
        }
    }
    let cap = |k: usize, plugs: bool| -> Vec<(VarId, f64)> {
        group
            .carriers
            .iter()
            .filter_map(|&s| {
                let u = if plugs { inst.ships[s].capacity_rf } else { inst.ships[s].capacity_dc };
                y[s][k].map(|v| (v, -(u as f64)))
            })
            .collect()
    };
    for (k, list) in per_arc.iter().enumerate() {
        if list.is_empty() {
            continue;
        }
        let name = arc_name(inst, k);
        let dc: Vec<_> = list.iter().map(|&(_, v)| (v, 1.0)).chain(cap(k, false)).collect();
        model.add_row(format!("cap_dc[{tag}{name}]"), dc, Sense::Le, 0.0);
        let rf: Vec<_> = list
            .iter()
            .filter(|&&(c, _)| reach.commodities[c].uses_plugs)
            .map(|&(_, v)| (v, 1.0))
            .collect();
        if !rf.is_empty() {
            model.add_row(format!("cap_rf[{tag}{name}]"), rf.into_iter().chain(cap(k, true)), Sense::Le, 0.0);
        }
        for &(c, v) in list {
            let com = &reach.commodities[c];
            if let Some(s) = group.ship {
                let bound = com.ship_bound(&inst.ships[s]);
                if let Some(yv) = y[s][k] {
                    model.add_row(
                        format!("bound[{tag}{},{name}]", com.label(inst)),
                        [(v, 1.0), (yv, -bound)],
                        Sense::Le,
                        0.0,
                    );
                }
            } else if tight {
                let terms = std::iter::once((v, 1.0)).chain(
                    group
                        .carriers
                        .iter()
                        .filter_map(|&s| y[s][k].map(|yv| (yv, -com.amount))),
                );
                model.add_row(format!("tight[{},{name}]", com.label(inst)), terms, Sense::Le, 0.0);
            }
        }
    }
    for &c in &group.commodities {
        let com = &reach.commodities[c];
        let label = com.label(inst);
        let arcs = &reach.commodity_arcs[c];
        let out_of = |j: usize| reach.out_arcs[j].iter().filter(|&&k| arcs[k]).map(|&k| x[&(group.ship, k, c)]).collect::<Vec<_>>();
        let into = |j: usize| reach.in_arcs[j].iter().filter(|&&k| arcs[k]).map(|&k| x[&(group.ship, k, c)]).collect::<Vec<_>>();
        let load = out_of(com.origin);
        let visit: Vec<_> = group
            .carriers
            .iter()
            .flat_map(|&s| {
                reach.out_arcs[com.origin]
                    .iter()
                    .filter(|&&k| !inst.is_sink_arc(k))
                    .filter_map(move |&k| y[s][k])
            })
            .map(|v| (v, -com.amount))
            .collect();
        model.add_row(
            format!("avail[{tag}{label}]"),
            load.iter().map(|&v| (v, 1.0)).chain(visit),
            Sense::Le,
            0.0,
        );
        let mut touched: Vec<usize> = arcs.ones().flat_map(|k| [inst.arcs[k].from, inst.arcs[k].to]).collect();
        touched.sort_unstable();
        touched.dedup();
        for j in touched {
            if j == com.origin {
                continue;
            }
            let inn = into(j);
            let out = out_of(j);
            let terms = inn.iter().map(|&v| (v, 1.0)).chain(out.iter().map(|&v| (v, -1.0)));
            if com.destinations.contains(&j) {
                if !out.is_empty() {
                    model.add_row(format!("pass[{tag}{label},{}]", inst.node_id(j)), terms, Sense::Ge, 0.0);
                }
            } else {
                model.add_row(format!("cons[{tag}{label},{}]", inst.node_id(j)), terms, Sense::Eq, 0.0);
            }
        }
    }
}

/// Surplus and deficit caps of empty equipment, summed over `groups`.
fn add_empty_caps(model: &mut LinearModel, inst: &Instance, reach: &ReachIndex, keys: &[Option<usize>], x: &HashMap<(Option<usize>, usize, usize), VarId>) {
    let collect = |members: &[usize], at_origin: bool| -> Vec<(VarId, f64)> {
        let mut terms = Vec::new();
        for &c in members {
            let com = &reach.commodities[c];
            for &key in keys {
                let node = if at_origin { com.origin } else { com.destinations[0] };
                let arcs = if at_origin { &reach.out_arcs[node] } else { &reach.in_arcs[node] };
                for &k in arcs {
                    if let Some(&v) = x.get(&(key, k, c)) {
                        terms.push((v, 1.0));
                    }
                }
            }
        }
        terms
    };
    for (p, members) in &reach.surplus_groups {
        let terms = collect(members, true);
        if !terms.is_empty() {
            let pt = &inst.empty_points[*p];
            model.add_row(
                format!("surplus[{},{}]", pt.cargo_type, inst.node_id(pt.visit)),
                terms,
                Sense::Le,
                pt.amount as f64,
            );
        }
    }
    for (p, members) in &reach.deficit_groups {
        let terms = collect(members, false);
        if !terms.is_empty() {
            let pt = &inst.empty_points[*p];
            model.add_row(
                format!("deficit[{},{}]", pt.cargo_type, inst.node_id(pt.visit)),
                terms,
                Sense::Le,
                (-pt.amount) as f64,
            );
        }
    }
}

/// The reduced model; `tight` adds the per-arc share rows
/// `x_ij <= a * sum_s y_ij`.
pub fn build_reduced(inst: &Instance, reach: &ReachIndex, tight: bool) -> (LinearModel, ArcFlowVars) {
    let mut model = LinearModel::new();
    let ships: Vec<usize> = (0..inst.ships.len()).collect();
    let y = add_routing(&mut model, inst, reach, &ships, true);
    let mut x = HashMap::new();
    let mut commodities: Vec<usize> = ships.iter().flat_map(|&s| reach.movable[s].iter().copied()).collect();
    commodities.sort_unstable();
    commodities.dedup();
    let group = CargoGroup {
        ship: None,
        carriers: &ships,
        commodities,
    };
    add_cargo(&mut model, inst, reach, &y, &group, tight, &mut x);
    add_empty_caps(&mut model, inst, reach, &[None], &x);
    (model, ArcFlowVars { y, x, ships })
}

/// The revised model with cargo flows per ship.
pub fn build_revised(inst: &Instance, reach: &ReachIndex) -> (LinearModel, ArcFlowVars) {
    let ships: Vec<usize> = (0..inst.ships.len()).collect();
    build_per_ship(inst, reach, &ships, true)
}

/// The revised model restricted to one ship without node-once rows: the
/// arc-flow pricing problem of column generation.
pub fn build_single_ship(inst: &Instance, reach: &ReachIndex, ship: usize) -> (LinearModel, ArcFlowVars) {
    build_per_ship(inst, reach, &[ship], false)
}

fn build_per_ship(inst: &Instance, reach: &ReachIndex, ships: &[usize], node_once: bool) -> (LinearModel, ArcFlowVars) {
    let mut model = LinearModel::new();
    let y = add_routing(&mut model, inst, reach, ships, node_once);
    let mut x = HashMap::new();
    for &s in ships {
        let group = CargoGroup {
            ship: Some(s),
            carriers: std::slice::from_ref(&s),
            commodities: reach.movable[s].clone(),
        };
        add_cargo(&mut model, inst, reach, &y, &group, false, &mut x);
    }
    let keys: Vec<Option<usize>> = ships.iter().map(|&s| Some(s)).collect();
    add_empty_caps(&mut model, inst, reach, &keys, &x);
    (
        model,
        ArcFlowVars {
            y,
            x,
            ships: ships.to_vec(),
        },
    )
}

/// Path of ship `s` read off integral routing values.
pub fn extract_path(inst: &Instance, reach: &ReachIndex, vars: &ArcFlowVars, values: &[f64], s: usize) -> Vec<usize> {
    let mut path = vec![inst.ships[s].start];
    let mut v = inst.ships[s].start;
    while v != inst.sink() {
        let next = reach.out_arcs[v]
            .iter()
            .find(|&&k| vars.y[s][k].is_some_and(|y| values[y.0] > 0.5))
            .map(|&k| inst.arcs[k].to);
        match next {
            Some(w) => {
                path.push(w);
                v = w;
            }
            None => break,
        }
    }
    path
}

/// Routing and net deliveries of an integral arc-flow solution.
pub fn extract_solution(inst: &Instance, reach: &ReachIndex, vars: &ArcFlowVars, values: &[f64], method: Method) -> Solution {
    let mut sol = Solution::without_routing(method, SolveStatus::Optimal, inst.ships.len());
    let mut owner = vec![None; inst.num_nodes()];
    for &s in &vars.ships {
        let path = extract_path(inst, reach, vars, values, s);
        for &v in &path {
            owner[v] = Some(s);
        }
        sol.paths[s] = path;
    }
    let keys: Vec<Option<usize>> = if vars.x.keys().any(|k| k.0.is_none()) {
        vec![None]
    } else {
        vars.ships.iter().map(|&s| Some(s)).collect()
    };
    for (c, com) in reach.commodities.iter().enumerate() {
        for &key in &keys {
            for &j in &com.destinations {
                let sum = |arcs: &[usize]| -> f64 {
                    arcs.iter()
                        .filter_map(|&k| vars.x.get(&(key, k, c)))
                        .map(|v| values[v.0])
                        .sum()
                };
                let net = sum(&reach.in_arcs[j]) - sum(&reach.out_arcs[j]);
                if net <= 1e-9 {
                    continue;
                }
                let Some(ship) = key.or(owner[com.origin]) else { continue };
                match com.kind {
                    CommodityKind::Demand(m) => sol.demand_flows.push(DemandFlow {
                        ship,
                        demand: m,
                        destination: j,
                        amount: net,
                    }),
                    CommodityKind::Empty(_) => sol.empty_flows.push(EmptyFlow {
                        ship,
                        cargo_type: com.cargo_type,
                        from: com.origin,
                        to: j,
                        amount: net,
                    }),
                }
            }
        }
    }
    sol.demand_flows.sort_by_key(|f| (f.demand, f.ship, f.destination));
    sol.empty_flows.sort_by_key(|f| (f.ship, f.from, f.to, f.cargo_type));
    sol
}

/// Builds the model of `method` (reduced, reduced-tight or revised), solves
/// it to optimality or `time_limit`, and extracts the routing.
pub fn solve_arc_flow(
    inst: &Instance,
    reach: &ReachIndex,
    method: Method,
    time_limit: Option<Duration>,
) -> Result<Solution, MipError> {
    let start = Instant::now();
    let (mut model, vars) = match method {
        Method::Reduced => build_reduced(inst, reach, false),
        Method::ReducedTight => build_reduced(inst, reach, true),
        Method::Revised => build_revised(inst, reach),
        other => panic!("{} is not an arc-flow method", other.as_str()),
    };
    let size = model.size();
    let options = MipOptions {
        time_limit,
        ..MipOptions::default()
    };
    let mip = solve_mip(&mut model, None, &options)?;
    let status = match mip.status {
        MipStatus::Optimal => SolveStatus::Optimal,
        MipStatus::TimeLimit | MipStatus::NodeLimit => SolveStatus::TimeLimit,
        MipStatus::Infeasible => SolveStatus::Infeasible,
        MipStatus::Unbounded | MipStatus::NumericalFailure => SolveStatus::NumericalFailure,
    };
    let mut sol = match &mip.values {
        Some(values) => {
            let mut sol = extract_solution(inst, reach, &vars, values, method);
            sol.status = status;
            sol.objective = mip.objective;
            sol
        }
        None => Solution::without_routing(method, status, inst.ships.len()),
    };
    sol.bound = if status == SolveStatus::Optimal { mip.objective } else { mip.bound };
    sol.diagnostics.branch_nodes = mip.nodes;
    sol.diagnostics.model_size = Some(size);
    sol.wall_seconds = start.elapsed().as_secs_f64();
    Ok(sol)
}

/// Optimum of the continuous relaxation of `model`.
pub fn relaxation_bound(model: &LinearModel) -> Option<f64> {
    let lp = solve_lp(&model.relaxed());
    lp.is_optimal().then_some(lp.objective)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn optimum(inst: &Instance, method: Method) -> Solution {
        let reach = ReachIndex::new(inst).unwrap();
        let sol = solve_arc_flow(inst, &reach, method, None).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        let eval = evaluate_objective(inst, &sol).unwrap();
        assert!((eval - sol.objective).abs() < 1e-6 * (1.0 + eval.abs()), "{eval} vs {}", sol.objective);
        assert!(verify_solution(inst, &sol).is_empty(), "{:?}", verify_solution(inst, &sol));
        sol
    }

    #[test]
    fn fixtures_match_known_optima() {
        let cases = [
            (fixtures::t1(), 676.0),
            (fixtures::overload_1(), 1270.0),
            (fixtures::reefer_pair(), 910.0),
            (fixtures::figure3(), 960.0),
            (fixtures::late_second_destination(), 970.0),
            (fixtures::strict_gap(), 0.0),
            (fixtures::empties(), 9730.0),
            (fixtures::empties().with_empty_revenue(crate::instance::Cents(30_000)), 12170.0),
            (fixtures::shared_corridor(), 555.0),
            (fixtures::pure_repositioning(), -42.0),
            (fixtures::fractional_master(), -20.0),
        ];
        for (inst, want) in cases {
            for method in [Method::Reduced, Method::ReducedTight, Method::Revised] {
                let sol = optimum(&inst, method);
                assert!((sol.objective - want).abs() < 1e-6, "{} {}: {}", inst.name, method.as_str(), sol.objective);
            }
        }
    }

    #[test]
    fn t1_routes_through_the_demand() {
        let sol = optimum(&fixtures::t1(), Method::Revised);
        assert_eq!(sol.paths, vec![vec![0, 1, 2, 3]]);
        assert_eq!(sol.demand_flows.len(), 1);
        assert!((sol.demand_flows[0].amount - 50.0).abs() < 1e-9);
    }

    #[test]
    fn t1_relaxation_is_tight() {
        let inst = fixtures::t1();
        let reach = ReachIndex::new(&inst).unwrap();
        let (model, _) = build_reduced(&inst, &reach, false);
        assert!((relaxation_bound(&model).unwrap() - 676.0).abs() < 1e-6);
    }

    #[test]
    fn strict_gap_separates_the_relaxations() {
        let inst = fixtures::strict_gap();
        let reach = ReachIndex::new(&inst).unwrap();
        let reduced = relaxation_bound(&build_reduced(&inst, &reach, false).0).unwrap();
        let tight = relaxation_bound(&build_reduced(&inst, &reach, true).0).unwrap();
        let revised = relaxation_bound(&build_revised(&inst, &reach).0).unwrap();
        assert!(revised <= tight + 1e-6 && tight <= reduced + 1e-6);
        assert!(reduced - revised > 1.0, "{reduced} {revised}");
    }
}
