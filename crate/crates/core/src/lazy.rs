//! Compact pricing with lazily separated capacity cuts.
//!
//! Each commodity gets one total-flow variable per ship instead of one per
//! arc. Capacity along the path is not modelled up front: integer candidates
//! are replayed leg by leg, and wherever the load leaving a node exceeds a
//! capacity, a cut over every commodity able to leave that node is added.
//! Cuts stay in the ship's model for the rest of the run.
//!
//! Replay unloads a multi-destination commodity at the first destination the
//! path visits. A cut then only stays valid if every pair of its members is
//! on board together on any path carrying both; commodities that could leave
//! the ship before another one boards are split into one variable per
//! destination under a shared availability cap.

use std::collections::HashSet;
use std::time::Instant;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::colgen::{self, largest, price_routing, pricing_status, ColgenConfig, Column, PricingEngine, Priced};
use crate::formulations::add_routing;
use crate::instance::{CargoType, CommodityKind, Instance, ReachIndex};
use crate::lp::{solve_mip, Basis, LazyRow, LinearModel, MipOptions, ModelSize, Sense, VarId, TOL_FEAS};
use crate::solution::{DemandFlow, Diagnostics, EmptyFlow, Method, ShipDiagnostics, Solution};
use crate::solve::{SolveError, SolveOptions};

/// When a multi-destination demand gets one variable per destination.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitRule {
    /// Never split. Demands with unequal unload costs are rejected.
    Disabled,
    /// Split when a second destination lies beyond the first, another
    /// demand loads in between and unloads beyond the second destination,
    /// and the origin reaches that demand's origin without the first
    /// destination.
    Overtaking,
    /// Split whenever some other commodity could board at or after one of
    /// the destinations and share a cut with the demand.
    #[default]
    Sound,
}

impl SplitRule {
    pub fn as_str(self) -> &'static str {
        match self {
            SplitRule::Disabled => "disabled",
            SplitRule::Overtaking => "overtaking",
            SplitRule::Sound => "sound",
        }
    }

    pub fn parse(s: &str) -> Option<SplitRule> {
        [SplitRule::Disabled, SplitRule::Overtaking, SplitRule::Sound]
            .into_iter()
            .find(|r| r.as_str() == s)
    }
}

/// A flow variable of the compact model: a whole commodity, or one
/// destination of a split demand.
#[derive(Clone, Debug, PartialEq)]
pub struct Member {
    pub commodity: usize,
    pub destinations: Vec<usize>,
    /// Arcs the member can travel on.
    pub arcs: FixedBitSet,
    /// Index of the split family, shared by the members of one demand.
    pub family: Option<usize>,
}

/// Split members per commodity for one ship.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SplitMap {
    pub members: Vec<Member>,
    /// Demands that were split.
    pub split: Vec<usize>,
}

fn unequal_unload_costs(inst: &Instance, dests: &[usize]) -> bool {
    dests.windows(2).any(|w| inst.move_cost(w[0]) != inst.move_cost(w[1]))
}

/// Whether two commodities have a node both can leave along their arcs.
fn share_a_node(inst: &Instance, reach: &ReachIndex, a: usize, b: usize) -> bool {
    let (x, y) = (&reach.commodity_arcs[a], &reach.commodity_arcs[b]);
    x.ones().any(|k| reach.passes(y, inst.arcs[k].from))
}

/// Nodes reachable from `from` without entering `avoid`.
fn reach_avoiding(reach: &ReachIndex, inst: &Instance, from: usize, avoid: usize) -> FixedBitSet {
    let mut seen = FixedBitSet::with_capacity(inst.num_nodes());
    if from == avoid {
        return seen;
    }
    let mut stack = vec![from];
    seen.insert(from);
    while let Some(v) = stack.pop() {
        for &k in &reach.out_arcs[v] {
            let w = inst.arcs[k].to;
            if w != avoid && !seen[w] {
                seen.insert(w);
                stack.push(w);
            }
        }
    }
    seen
}

fn needs_split(inst: &Instance, reach: &ReachIndex, ship: usize, c: usize, rule: SplitRule) -> Result<bool, SolveError> {
    let com = &reach.commodities[c];
    if com.destinations.len() < 2 {
        return Ok(false);
    }
    let unequal = unequal_unload_costs(inst, &com.destinations);
    let others = reach.movable[ship].iter().copied().filter(|&m| m != c);
    match rule {
        SplitRule::Disabled if unequal => Err(SolveError::Model(format!(
            "{} has destinations with different unload costs and splitting is disabled",
            com.label(inst)
        ))),
        SplitRule::Disabled => Ok(false),
        _ if unequal => Ok(true),
        SplitRule::Sound => {
            let mut others = others;
            Ok(others.any(|m| {
                let o_star = reach.commodities[m].origin;
                com.destinations.iter().any(|&d1| reach.reachable(d1, o_star)) && share_a_node(inst, reach, c, m)
            }))
        }
        SplitRule::Overtaking => {
            let others: Vec<usize> = others.collect();
            for &d1 in &com.destinations {
                let avoiding = reach_avoiding(reach, inst, com.origin, d1);
                for &d2 in &com.destinations {
                    if d1 == d2 || !reach.reachable(d1, d2) {
                        continue;
                    }
                    for &m in &others {
                        let star = &reach.commodities[m];
                        let o_star = star.origin;
                        if reach.reachable(d1, o_star)
                            && reach.reachable(o_star, d2)
                            && star.destinations.iter().any(|&d| reach.reachable(d2, d))
                            && avoiding[o_star]
                        {
                            return Ok(true);
                        }
                    }
                }
            }
            Ok(false)
        }
    }
}

/// Flow variables of the compact model of `ship`, after splitting.
pub fn split_demand_triples(inst: &Instance, reach: &ReachIndex, ship: usize, rule: SplitRule) -> Result<SplitMap, SolveError> {
    let mut map = SplitMap::default();
    for &c in &reach.movable[ship] {
        let com = &reach.commodities[c];
        if needs_split(inst, reach, ship, c, rule)? {
            let family = Some(map.split.len());
            if let CommodityKind::Demand(m) = com.kind {
                map.split.push(m);
            }
            for &d in &com.destinations {
                let arcs = reach.arcs_between(inst, com.origin, &[d]);
                if arcs.is_clear() {
                    continue;
                }
                map.members.push(Member {
                    commodity: c,
                    destinations: vec![d],
                    arcs,
                    family,
                });
            }
        } else {
            map.members.push(Member {
                commodity: c,
                destinations: com.destinations.clone(),
                arcs: reach.commodity_arcs[c].clone(),
                family: None,
            });
        }
    }
    Ok(map)
}

/// Variable handles of a compact pricing model.
#[derive(Clone, Debug, Default)]
pub struct CompactVars {
    pub ship: usize,
    /// Routing variable per arc, absent where the ship cannot sail.
    pub y: Vec<Option<VarId>>,
    pub members: Vec<Member>,
    /// Flow variable per member.
    pub x: Vec<VarId>,
    pub splits: usize,
}

/// A capacity cut at `node`: the members may carry at most `rhs` together.
#[derive(Clone, Debug, PartialEq)]
pub struct Cut {
    pub node: usize,
    /// `Dc` bounds all cargo against total capacity, `Rf` laden reefers
    /// against plugs.
    pub scope: CargoType,
    /// Member indices.
    pub members: Vec<usize>,
    pub rhs: f64,
}

impl Cut {
    pub fn row(&self, inst: &Instance, vars: &CompactVars) -> LazyRow {
        LazyRow {
            name: format!("cut_{}[{},{}]", self.scope, inst.ships[vars.ship].id, inst.node_id(self.node)),
            terms: self.members.iter().map(|&m| (vars.x[m], 1.0)).collect(),
            sense: Sense::Le,
            rhs: self.rhs,
        }
    }
}

/// The compact pricing model of `ship` with node prices, exclusions and
/// carried cuts applied.
pub fn build_compact_pricing(
    inst: &Instance,
    reach: &ReachIndex,
    ship: usize,
    rule: SplitRule,
    penalty: &[f64],
    forbidden: &FixedBitSet,
    cuts: &[Cut],
) -> Result<(LinearModel, CompactVars), SolveError> {
    let (mut model, vars) = build_compact_base(inst, reach, ship, rule)?;
    let base: Vec<f64> = model.vars().iter().map(|v| v.objective).collect();
    price_routing(&mut model, inst, &vars.y, &base, penalty, forbidden);
    for cut in cuts {
        let row = cut.row(inst, &vars);
        model.add_row(row.name, row.terms, row.sense, row.rhs);
    }
    Ok((model, vars))
}

fn build_compact_base(inst: &Instance, reach: &ReachIndex, ship: usize, rule: SplitRule) -> Result<(LinearModel, CompactVars), SolveError> {
    let map = split_demand_triples(inst, reach, ship, rule)?;
    let mut model = LinearModel::new();
    let y = add_routing(&mut model, inst, reach, &[ship], false).swap_remove(ship);
    let s = &inst.ships[ship];
    let mut x = Vec::with_capacity(map.members.len());
    for m in &map.members {
        let com = &reach.commodities[m.commodity];
        let name = if m.family.is_some() {
            format!("x[{},{}]", com.label(inst), inst.node_id(m.destinations[0]))
        } else {
            format!("x[{}]", com.label(inst))
        };
        x.push(model.add_continuous(name, 0.0, f64::INFINITY, com.unit_profit(inst, m.destinations[0])));
    }
    let leaving = |k: usize| -> Vec<(VarId, f64)> {
        reach.out_arcs[k]
            .iter()
            .filter(|&&a| !inst.is_sink_arc(a))
            .filter_map(|&a| y[a])
            .map(|v| (v, 1.0))
            .collect()
    };
    let mut origins: Vec<usize> = map.members.iter().map(|m| reach.commodities[m.commodity].origin).collect();
    origins.sort_unstable();
    origins.dedup();
    for &k in &origins {
        for scope in CargoType::ALL {
            let loaded: Vec<(VarId, f64)> = map
                .members
                .iter()
                .zip(&x)
                .filter(|(m, _)| {
                    let com = &reach.commodities[m.commodity];
                    com.origin == k && (scope == CargoType::Dc || com.uses_plugs)
                })
                .map(|(_, &v)| (v, 1.0))
                .collect();
            if loaded.is_empty() {
                continue;
            }
            let u = s.capacity(scope) as f64;
            let terms = loaded.into_iter().chain(leaving(k).into_iter().map(|(v, _)| (v, -u)));
            model.add_row(format!("load_{scope}[{}]", inst.node_id(k)), terms, Sense::Le, 0.0);
        }
    }
    for (m, &xv) in map.members.iter().zip(&x) {
        let com = &reach.commodities[m.commodity];
        let bound = com.ship_bound(s);
        let label = format!("{},{}", com.label(inst), inst.node_id(m.destinations[0]));
        let out: Vec<(VarId, f64)> = reach.out_arcs[com.origin]
            .iter()
            .filter(|&&a| m.arcs[a])
            .filter_map(|&a| y[a])
            .map(|v| (v, -bound))
            .collect();
        model.add_row(format!("origin[{label}]"), std::iter::once((xv, 1.0)).chain(out), Sense::Le, 0.0);
        let into: Vec<(VarId, f64)> = m
            .destinations
            .iter()
            .flat_map(|&d| reach.in_arcs[d].iter())
            .filter(|&&a| m.arcs[a])
            .filter_map(|&a| y[a])
            .map(|v| (v, -bound))
            .collect();
        model.add_row(format!("dest[{label}]"), std::iter::once((xv, 1.0)).chain(into), Sense::Le, 0.0);
    }
    for f in 0..map.split.len() {
        let terms: Vec<(VarId, f64)> = map
            .members
            .iter()
            .zip(&x)
            .filter(|(m, _)| m.family == Some(f))
            .map(|(_, &v)| (v, 1.0))
            .collect();
        let c = map.members.iter().find(|m| m.family == Some(f)).unwrap().commodity;
        let com = &reach.commodities[c];
        model.add_row(format!("split[{}]", com.label(inst)), terms, Sense::Le, com.amount);
    }
    let group_rows = |model: &mut LinearModel, groups: &[(usize, Vec<usize>)], kind: &str| {
        for (p, commodities) in groups {
            let terms: Vec<(VarId, f64)> = map
                .members
                .iter()
                .zip(&x)
                .filter(|(m, _)| commodities.contains(&m.commodity))
                .map(|(_, &v)| (v, 1.0))
                .collect();
            if !terms.is_empty() {
                let pt = &inst.empty_points[*p];
                let name = format!("{kind}[{},{}]", pt.cargo_type, inst.node_id(pt.visit));
                model.add_row(name, terms, Sense::Le, pt.amount.unsigned_abs() as f64);
            }
        }
    };
    group_rows(&mut model, &reach.surplus_groups, "surplus");
    group_rows(&mut model, &reach.deficit_groups, "deficit");
    let splits = map.split.len();
    Ok((
        model,
        CompactVars {
            ship,
            y,
            members: map.members,
            x,
            splits,
        },
    ))
}

/// Path of the ship in a candidate of the compact model.
fn candidate_path(inst: &Instance, reach: &ReachIndex, vars: &CompactVars, values: &[f64]) -> Vec<usize> {
    let mut path = vec![inst.ships[vars.ship].start];
    let mut v = path[0];
    while v != inst.sink() {
        let Some(&k) = reach.out_arcs[v]
            .iter()
            .find(|&&k| vars.y[k].is_some_and(|y| values[y.0] > 0.5))
        else {
            break;
        };
        v = inst.arcs[k].to;
        path.push(v);
    }
    path
}

/// Node where a member leaves the ship on `path`: its first visited
/// destination after the origin.
fn unload_node(reach: &ReachIndex, member: &Member, path: &[usize]) -> Option<usize> {
    let origin = reach.commodities[member.commodity].origin;
    let start = path.iter().position(|&v| v == origin)?;
    path[start + 1..].iter().copied().find(|v| member.destinations.contains(v))
}

/// Replays `flows` (per member) along `path` and returns one cut per node and
/// scope where the load leaving a loading node exceeds capacity.
pub fn separate_cuts(inst: &Instance, reach: &ReachIndex, vars: &CompactVars, path: &[usize], flows: &[f64]) -> Vec<Cut> {
    let ship = &inst.ships[vars.ship];
    let mut onboard = [0.0f64; 2];
    let mut cuts = Vec::new();
    let unload: Vec<Option<usize>> = vars.members.iter().map(|m| unload_node(reach, m, path)).collect();
    for &v in path {
        if v == inst.sink() {
            break;
        }
        for (m, member) in vars.members.iter().enumerate() {
            if flows[m] > TOL_FEAS && unload[m] == Some(v) {
                let com = &reach.commodities[member.commodity];
                onboard[0] -= flows[m];
                if com.uses_plugs {
                    onboard[1] -= flows[m];
                }
            }
        }
        let mut loaded = false;
        for (m, member) in vars.members.iter().enumerate() {
            let com = &reach.commodities[member.commodity];
            if flows[m] > TOL_FEAS && com.origin == v && unload[m].is_some() {
                loaded = true;
                onboard[0] += flows[m];
                if com.uses_plugs {
                    onboard[1] += flows[m];
                }
            }
        }
        if !loaded {
            continue;
        }
        for scope in CargoType::ALL {
            let u = ship.capacity(scope) as f64;
            if onboard[scope.index()] <= u + TOL_FEAS {
                continue;
            }
            let members = vars
                .members
                .iter()
                .enumerate()
                .filter(|(_, mem)| {
                    (scope == CargoType::Dc || reach.commodities[mem.commodity].uses_plugs) && reach.passes(&mem.arcs, v)
                })
                .map(|(m, _)| m)
                .collect();
            cuts.push(Cut {
                node: v,
                scope,
                members,
                rhs: u,
            });
        }
    }
    cuts
}

/// Column encoded by a candidate: the path and each member's delivery.
fn candidate_column(inst: &Instance, reach: &ReachIndex, vars: &CompactVars, path: Vec<usize>, flows: &[f64]) -> Result<Column, SolveError> {
    let mut sol = Solution::without_routing(Method::ColgenLazy, crate::solution::SolveStatus::Optimal, inst.ships.len());
    for (m, member) in vars.members.iter().enumerate() {
        if flows[m] <= 1e-9 {
            continue;
        }
        let Some(to) = unload_node(reach, member, &path) else { continue };
        let com = &reach.commodities[member.commodity];
        match com.kind {
            CommodityKind::Demand(d) => sol.demand_flows.push(DemandFlow {
                ship: vars.ship,
                demand: d,
                destination: to,
                amount: flows[m],
            }),
            CommodityKind::Empty(_) => sol.empty_flows.push(EmptyFlow {
                ship: vars.ship,
                cargo_type: com.cargo_type,
                from: com.origin,
                to,
                amount: flows[m],
            }),
        }
    }
    sol.demand_flows.sort_by_key(|f| (f.demand, f.destination));
    sol.empty_flows.sort_by_key(|f| (f.from, f.to, f.cargo_type));
    sol.paths[vars.ship] = path;
    Column::from_solution(inst, vars.ship, sol).map_err(|e| SolveError::Numerical(e.to_string()))
}

struct ShipState {
    model: LinearModel,
    vars: CompactVars,
    base: Vec<f64>,
    /// Root basis of the previous pricing solve, reused as a warm start.
    basis: Option<Basis>,
    cuts: Vec<Cut>,
    keys: HashSet<(usize, CargoType)>,
}

/// Pricing engine over compact models with per-ship cut pools.
pub struct LazyPricing<'a> {
    inst: &'a Instance,
    reach: &'a ReachIndex,
    rule: SplitRule,
    ships: Vec<Option<ShipState>>,
    pub separation_calls: usize,
    accepted: Vec<Column>,
}

impl<'a> LazyPricing<'a> {
    /// Fails when a demand needs a split that `rule` forbids.
    pub fn new(inst: &'a Instance, reach: &'a ReachIndex, rule: SplitRule) -> Result<Self, SolveError> {
        let mut ships = Vec::with_capacity(inst.ships.len());
        for s in 0..inst.ships.len() {
            let (model, vars) = build_compact_base(inst, reach, s, rule)?;
            let base = model.vars().iter().map(|v| v.objective).collect();
            ships.push(Some(ShipState {
                model,
                vars,
                base,
                basis: None,
                cuts: Vec::new(),
                keys: HashSet::new(),
            }));
        }
        Ok(LazyPricing {
            inst,
            reach,
            rule,
            ships,
            separation_calls: 0,
            accepted: Vec::new(),
        })
    }

    pub fn rule(&self) -> SplitRule {
        self.rule
    }

    /// Cuts collected so far for `ship`.
    pub fn cuts(&self, ship: usize) -> &[Cut] {
        self.ships[ship].as_ref().map_or(&[], |s| &s.cuts)
    }

    pub fn vars(&self, ship: usize) -> &CompactVars {
        &self.ships[ship].as_ref().unwrap().vars
    }

    /// Every column returned by pricing so far, in order.
    pub fn accepted(&self) -> &[Column] {
        &self.accepted
    }

    /// Size of the compact model of `ship` before any cut.
    pub fn base_size(&self, ship: usize) -> ModelSize {
        let st = self.ships[ship].as_ref().unwrap();
        let mut size = st.model.size();
        size.rows -= st.cuts.len();
        size.nnz -= st.cuts.iter().map(|c| c.members.len()).sum::<usize>();
        size
    }
}

impl PricingEngine for LazyPricing<'_> {
    fn price(&mut self, ship: usize, penalty: &[f64], forbidden: &FixedBitSet, deadline: Option<Instant>) -> Result<Priced, SolveError> {
        let (inst, reach) = (self.inst, self.reach);
        let st = self.ships[ship].as_mut().unwrap();
        let mut model = st.model.clone();
        price_routing(&mut model, inst, &st.vars.y, &st.base, penalty, forbidden);
        let options = MipOptions {
            time_limit: deadline.map(|d| d.saturating_duration_since(Instant::now())),
            root_basis: st.basis.take(),
            ..MipOptions::default()
        };
        let mut found: Vec<Cut> = Vec::new();
        let mut calls = 0;
        let vars = &st.vars;
        let mut callback = |_: &LinearModel, values: &[f64]| -> Vec<LazyRow> {
            calls += 1;
            let path = candidate_path(inst, reach, vars, values);
            let flows: Vec<f64> = vars.x.iter().map(|v| values[v.0]).collect();
            let cuts = separate_cuts(inst, reach, vars, &path, &flows);
            let rows = cuts.iter().map(|c| c.row(inst, vars)).collect();
            found.extend(cuts);
            rows
        };
        let mip = solve_mip(&mut model, Some(&mut callback), &options)?;
        self.separation_calls += calls;
        log::debug!(
            "lazy pricing ship={ship} status={:?} nodes={} lp_iterations={} cuts={} separations={calls}",
            mip.status,
            mip.nodes,
            mip.lp_iterations,
            mip.cuts_added
        );
        st.basis = mip.root_basis.clone();
        for cut in found {
            if st.keys.insert((cut.node, cut.scope)) {
                let row = cut.row(inst, &st.vars);
                st.model.add_row(row.name, row.terms, row.sense, row.rhs);
                st.cuts.push(cut);
            }
        }
        if let Some(p) = pricing_status(mip.status)? {
            return Ok(p);
        }
        let values = mip.values.expect("optimal pricing has values");
        let path = candidate_path(inst, reach, &st.vars, &values);
        let flows: Vec<f64> = st.vars.x.iter().map(|v| values[v.0]).collect();
        debug_assert!(separate_cuts(inst, reach, &st.vars, &path, &flows).is_empty());
        let column = candidate_column(inst, reach, &st.vars, path, &flows)?;
        self.accepted.push(column.clone());
        Ok(Priced::Column(column))
    }

    fn model_size(&self) -> Option<ModelSize> {
        largest((0..self.ships.len()).map(|s| self.base_size(s)))
    }

    fn report(&self, diagnostics: &mut Diagnostics) {
        diagnostics.separation_calls += self.separation_calls;
        for (s, st) in self.ships.iter().enumerate() {
            let st = st.as_ref().unwrap();
            let gamma_dc = st.cuts.iter().filter(|c| c.scope == CargoType::Dc).count();
            let gamma_rf = st.cuts.len() - gamma_dc;
            diagnostics.cuts_dc += gamma_dc;
            diagnostics.cuts_rf += gamma_rf;
            diagnostics.ships.push(ShipDiagnostics {
                ship: self.inst.ships[s].id.clone(),
                gamma_dc,
                gamma_rf,
                splits: st.vars.splits,
            });
        }
    }
}

/// Column generation with compact pricing and lazy capacity cuts.
pub fn run_colgen_lazy(inst: &Instance, reach: &ReachIndex, options: &SolveOptions) -> Result<Solution, SolveError> {
    let config = ColgenConfig::from_options(options);
    let mut engine = LazyPricing::new(inst, reach, options.split_rule)?;
    let mut sol = colgen::run_column_generation(inst, reach, &mut engine, &config)?;
    sol.method = Method::ColgenLazy;
    Ok(sol)
}
