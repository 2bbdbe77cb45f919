//! Column generation over ship paths.
//!
//! The master picks one column per ship with every visit covered at most
//! once. Each ship also owns a dummy column with an empty node set and a
//! prohibitive cost, so the master is always feasible. If the master
//! relaxation ends fractional, the search branches on node coverage: first by
//! ship type, then by single ship. One child forbids the group at the node,
//! the other reserves the node for the group and demands that it be covered.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};
use std::time::Instant;

use fixedbitset::FixedBitSet;

use crate::formulations::{build_single_ship, extract_solution, ArcFlowVars};
use crate::instance::{Instance, ReachIndex};
use crate::lp::{solve_lp_with, solve_mip, Basis, LinearModel, LpOptions, LpSolution, MipOptions, MipStatus, ModelSize, RowId, Sense, TOL_GAP, TOL_INT};
use crate::solution::{evaluate_objective, DemandFlow, Diagnostics, EmptyFlow, EvalError, Method, Solution, SolveStatus};
use crate::solve::{SolveError, SolveOptions};

/// A ship path with its loading plan.
#[derive(Clone, Debug, PartialEq)]
pub struct Column {
    pub ship: usize,
    pub path: Vec<usize>,
    /// Visits on the path; the sink is not a member.
    pub nodes: FixedBitSet,
    pub demand_flows: Vec<DemandFlow>,
    pub empty_flows: Vec<EmptyFlow>,
    /// Profit of the ship alone on this path.
    pub profit: f64,
}

impl Column {
    /// Column of `ship` in a solution that routes only that ship.
    pub fn from_solution(inst: &Instance, ship: usize, sol: Solution) -> Result<Column, EvalError> {
        let profit = evaluate_objective(inst, &sol)?;
        let path = sol.paths[ship].clone();
        let mut nodes = FixedBitSet::with_capacity(inst.visits.len());
        for &v in &path {
            if v != inst.sink() {
                nodes.insert(v);
            }
        }
        Ok(Column {
            ship,
            path,
            nodes,
            demand_flows: sol.demand_flows,
            empty_flows: sol.empty_flows,
            profit,
        })
    }

    /// Profit less the node prices of the visits on the path.
    pub fn value(&self, penalty: &[f64]) -> f64 {
        self.profit - self.nodes.ones().map(|i| penalty[i]).sum::<f64>()
    }
}

/// Duals of the relaxed master: `pi` per ship convexity row, `mu` per
/// visit node-once row.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MasterDuals {
    pub pi: Vec<f64>,
    pub mu: Vec<f64>,
}

/// Outcome of one pricing call.
#[derive(Clone, Debug)]
pub enum Priced {
    /// Best column under the given node prices.
    Column(Column),
    /// No path avoids the forbidden nodes.
    Infeasible,
    TimeLimit,
}

/// Solver for the single-ship problem with node prices.
pub trait PricingEngine {
    /// Best column of `ship` maximising profit minus `penalty` over the
    /// visited nodes, never entering a node in `forbidden`.
    fn price(&mut self, ship: usize, penalty: &[f64], forbidden: &FixedBitSet, deadline: Option<Instant>) -> Result<Priced, SolveError>;

    /// Largest pricing model built so far.
    fn model_size(&self) -> Option<ModelSize>;

    fn report(&self, _diagnostics: &mut Diagnostics) {}
}

fn remaining(deadline: Option<Instant>) -> Option<std::time::Duration> {
    deadline.map(|d| d.saturating_duration_since(Instant::now()))
}

/// Applies node prices and exclusions to the routing variables of a
/// single-ship model.
pub(crate) fn price_routing(model: &mut LinearModel, inst: &Instance, y: &[Option<crate::lp::VarId>], base: &[f64], penalty: &[f64], forbidden: &FixedBitSet) {
    for (k, v) in y.iter().enumerate() {
        let Some(v) = *v else { continue };
        let a = &inst.arcs[k];
        let price = if a.to == inst.sink() { 0.0 } else { penalty[a.to] };
        model.set_objective(v, base[v.0] - price);
        let banned = (a.to != inst.sink() && forbidden[a.to]) || forbidden[a.from];
        model.set_bounds(v, 0.0, if banned { 0.0 } else { 1.0 });
    }
}

pub(crate) fn pricing_status(status: MipStatus) -> Result<Option<Priced>, SolveError> {
    match status {
        MipStatus::Optimal => Ok(None),
        MipStatus::Infeasible => Ok(Some(Priced::Infeasible)),
        MipStatus::TimeLimit | MipStatus::NodeLimit => Ok(Some(Priced::TimeLimit)),
        other => Err(SolveError::Numerical(format!("pricing ended with {other:?}"))),
    }
}

struct ShipModel {
    model: LinearModel,
    vars: ArcFlowVars,
    base: Vec<f64>,
    basis: Option<Basis>,
}

/// Pricing on the per-ship arc-flow model.
pub struct ArcFlowPricing<'a> {
    inst: &'a Instance,
    reach: &'a ReachIndex,
    models: Vec<Option<ShipModel>>,
}

impl<'a> ArcFlowPricing<'a> {
    pub fn new(inst: &'a Instance, reach: &'a ReachIndex) -> Self {
        ArcFlowPricing {
            inst,
            reach,
            models: (0..inst.ships.len()).map(|_| None).collect(),
        }
    }

    fn ship_model(&mut self, ship: usize) -> &mut ShipModel {
        let (inst, reach) = (self.inst, self.reach);
        self.models[ship].get_or_insert_with(|| {
            let (model, vars) = build_single_ship(inst, reach, ship);
            let base = model.vars().iter().map(|v| v.objective).collect();
            ShipModel {
                model,
                vars,
                base,
                basis: None,
            }
        })
    }
}

impl PricingEngine for ArcFlowPricing<'_> {
    fn price(&mut self, ship: usize, penalty: &[f64], forbidden: &FixedBitSet, deadline: Option<Instant>) -> Result<Priced, SolveError> {
        let (inst, reach) = (self.inst, self.reach);
        let sm = self.ship_model(ship);
        let mut model = sm.model.clone();
        price_routing(&mut model, inst, &sm.vars.y[ship], &sm.base, penalty, forbidden);
        let options = MipOptions {
            time_limit: remaining(deadline),
            root_basis: sm.basis.take(),
            ..MipOptions::default()
        };
        let mip = solve_mip(&mut model, None, &options)?;
        sm.basis = mip.root_basis.clone();
        if let Some(p) = pricing_status(mip.status)? {
            return Ok(p);
        }
        let values = mip.values.expect("optimal pricing has values");
        let sol = extract_solution(inst, reach, &sm.vars, &values, Method::Colgen);
        let col = Column::from_solution(inst, ship, sol).map_err(|e| SolveError::Numerical(e.to_string()))?;
        Ok(Priced::Column(col))
    }

    fn model_size(&self) -> Option<ModelSize> {
        largest(self.models.iter().flatten().map(|m| m.model.size()))
    }
}

pub(crate) fn largest(sizes: impl Iterator<Item = ModelSize>) -> Option<ModelSize> {
    sizes.max_by_key(|s| (s.rows + s.cols + s.nnz, s.rows, s.cols))
}

#[derive(Clone, Debug, Default)]
pub struct ColgenConfig {
    pub deadline: Option<Instant>,
    pub batched: bool,
}

impl ColgenConfig {
    pub fn from_options(options: &SolveOptions) -> Self {
        ColgenConfig {
            deadline: options.time_limit.map(|t| Instant::now() + t),
            batched: options.batched,
        }
    }
}

/// A coverage decision at one node for a group of ships.
#[derive(Clone, Debug, PartialEq)]
struct Decision {
    node: usize,
    group: Vec<bool>,
    /// `true`: only the group may cover the node, and it must. `false`: the
    /// group may not cover it.
    keep: bool,
}

impl Decision {
    fn forbids(&self, ship: usize) -> bool {
        self.keep != self.group[ship]
    }
}

fn forbidden_nodes(inst: &Instance, decisions: &[Decision], ship: usize) -> FixedBitSet {
    let mut f = FixedBitSet::with_capacity(inst.visits.len());
    for d in decisions {
        if d.forbids(ship) {
            f.insert(d.node);
        }
    }
    f
}

fn allowed(col: &Column, decisions: &[Decision]) -> bool {
    decisions.iter().all(|d| !(d.forbids(col.ship) && col.nodes[d.node]))
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Entry {
    Column(usize),
    Dummy,
    Artificial,
}

/// Penalty of a dummy column: below any routing's profit.
fn dummy_cost(inst: &Instance) -> f64 {
    10.0 * inst.money_scale() + 1.0
}

/// Restricted master over a column pool.
struct Master {
    model: LinearModel,
    convex: Vec<RowId>,
    node_rows: Vec<RowId>,
    /// Cover rows with the index of their decision.
    cover_rows: Vec<(RowId, usize)>,
    entries: Vec<Entry>,
    basis: Option<Basis>,
}

impl Master {
    fn new(inst: &Instance, decisions: &[Decision]) -> Master {
        let mut model = LinearModel::new();
        let big = dummy_cost(inst);
        let convex: Vec<RowId> = inst
            .ships
            .iter()
            .map(|s| model.add_row(format!("ship[{}]", s.id), [], Sense::Eq, 1.0))
            .collect();
        let node_rows = inst
            .visits
            .iter()
            .map(|v| model.add_row(format!("once[{}]", v.id), [], Sense::Le, 1.0))
            .collect();
        let mut cover_rows = Vec::new();
        for (k, d) in decisions.iter().enumerate() {
            if d.keep {
                let r = model.add_row(format!("cover[{k}]"), [], Sense::Ge, 1.0);
                cover_rows.push((r, k));
            }
        }
        let mut entries = Vec::new();
        for (s, ship) in inst.ships.iter().enumerate() {
            model.add_column(format!("dummy[{}]", ship.id), 0.0, f64::INFINITY, -big, [(convex[s], 1.0)]);
            entries.push(Entry::Dummy);
        }
        for &(r, k) in &cover_rows {
            model.add_column(format!("art[{k}]"), 0.0, f64::INFINITY, -big, [(r, 1.0)]);
            entries.push(Entry::Artificial);
        }
        Master {
            model,
            convex,
            node_rows,
            cover_rows,
            entries,
            basis: None,
        }
    }

    fn add(&mut self, inst: &Instance, decisions: &[Decision], idx: usize, col: &Column) {
        let mut terms = vec![(self.convex[col.ship], 1.0)];
        terms.extend(col.nodes.ones().map(|i| (self.node_rows[i], 1.0)));
        for &(r, k) in &self.cover_rows {
            let d = &decisions[k];
            if d.group[col.ship] && col.nodes[d.node] {
                terms.push((r, 1.0));
            }
        }
        let name = format!("z[{},{idx}]", inst.ships[col.ship].id);
        self.model.add_column(name, 0.0, f64::INFINITY, col.profit, terms);
        self.entries.push(Entry::Column(idx));
    }

    fn solve(&mut self) -> Result<LpSolution, SolveError> {
        let mut lp = solve_lp_with(&self.model, None, self.basis.as_ref(), &LpOptions::default());
        if !lp.is_optimal() && self.basis.is_some() {
            lp = solve_lp_with(&self.model, None, None, &LpOptions::default());
        }
        if !lp.is_optimal() {
            return Err(SolveError::Numerical(format!("master ended with {:?}", lp.status)));
        }
        self.basis = lp.basis.clone();
        Ok(lp)
    }

    fn duals(&self, lp: &LpSolution) -> MasterDuals {
        MasterDuals {
            pi: self.convex.iter().map(|r| lp.duals[r.0]).collect(),
            mu: self.node_rows.iter().map(|r| lp.duals[r.0]).collect(),
        }
    }

    /// Node prices seen by `ship`: node-once duals plus the (non-positive)
    /// duals of cover rows whose group contains the ship.
    fn penalty(&self, lp: &LpSolution, decisions: &[Decision], ship: usize) -> Vec<f64> {
        let mut pen: Vec<f64> = self.node_rows.iter().map(|r| lp.duals[r.0]).collect();
        for &(r, k) in &self.cover_rows {
            let d = &decisions[k];
            if d.group[ship] {
                pen[d.node] += lp.duals[r.0];
            }
        }
        pen
    }
}

/// Result of the restricted master over a fixed column set.
#[derive(Clone, Debug)]
pub struct RmpSolution {
    pub objective: f64,
    /// Value per input column.
    pub values: Vec<f64>,
    /// Value of each ship's dummy column.
    pub dummies: Vec<f64>,
    /// Present for the relaxation only.
    pub duals: Option<MasterDuals>,
}

/// Solves the master over `columns` (plus one dummy per ship), as an LP when
/// `relax` is set and with binary column variables otherwise.
pub fn solve_rmp(inst: &Instance, columns: &[Column], relax: bool) -> Result<RmpSolution, SolveError> {
    let mut master = Master::new(inst, &[]);
    for (k, c) in columns.iter().enumerate() {
        master.add(inst, &[], k, c);
    }
    let split = |entries: &[Entry], values: &[f64]| {
        let mut cols = vec![0.0; columns.len()];
        let mut dummies = Vec::new();
        for (j, e) in entries.iter().enumerate() {
            match e {
                Entry::Column(k) => cols[*k] = values[j],
                Entry::Dummy => dummies.push(values[j]),
                Entry::Artificial => {}
            }
        }
        (cols, dummies)
    };
    if relax {
        let lp = master.solve()?;
        let (values, dummies) = split(&master.entries, &lp.values);
        return Ok(RmpSolution {
            objective: lp.objective,
            values,
            dummies,
            duals: Some(master.duals(&lp)),
        });
    }
    let mut model = master.model.clone();
    for j in 0..model.num_vars() {
        let v = crate::lp::VarId(j);
        model.set_bounds(v, 0.0, 1.0);
    }
    let mut model = to_binary(model);
    let mip = solve_mip(&mut model, None, &MipOptions::default())?;
    let values = mip
        .values
        .ok_or_else(|| SolveError::Numerical(format!("integer master ended with {:?}", mip.status)))?;
    let (values, dummies) = split(&master.entries, &values);
    Ok(RmpSolution {
        objective: mip.objective,
        values,
        dummies,
        duals: None,
    })
}

fn to_binary(model: LinearModel) -> LinearModel {
    let mut out = LinearModel::new();
    for v in model.vars() {
        out.add_var(v.name.clone(), v.lower, v.upper, v.objective, true);
    }
    for r in model.rows() {
        out.add_row(r.name.clone(), r.terms.iter().copied(), r.sense, r.rhs);
    }
    out
}

fn ships_by_path_count(reach: &ReachIndex, descending: bool) -> Vec<usize> {
    let mut order: Vec<usize> = (0..reach.path_counts.len()).collect();
    if descending {
        order.sort_by(|&a, &b| reach.path_counts[b].cmp(&reach.path_counts[a]));
    } else {
        order.sort_by_key(|&s| reach.path_counts[s]);
    }
    order
}

/// Greedy start: ships from fewest to most paths, each priced with zero
/// duals and with the nodes of earlier ships excluded.
pub fn initial_columns(inst: &Instance, reach: &ReachIndex, engine: &mut dyn PricingEngine, deadline: Option<Instant>) -> Result<Vec<Column>, SolveError> {
    let zero = vec![0.0; inst.visits.len()];
    let mut used = FixedBitSet::with_capacity(inst.visits.len());
    let mut out = Vec::new();
    for s in ships_by_path_count(reach, false) {
        match engine.price(s, &zero, &used, deadline)? {
            Priced::Column(c) => {
                used.union_with(&c.nodes);
                out.push(c);
            }
            Priced::Infeasible => {}
            Priced::TimeLimit => break,
        }
    }
    Ok(out)
}

/// Column pool shared by all branch nodes, deduplicated by (ship, path).
#[derive(Default)]
struct Pool {
    columns: Vec<Column>,
    keys: HashSet<(usize, Vec<usize>)>,
}

impl Pool {
    fn insert(&mut self, col: Column) -> Option<usize> {
        if !self.keys.insert((col.ship, col.path.clone())) {
            return None;
        }
        self.columns.push(col);
        Some(self.columns.len() - 1)
    }
}

struct BpNode {
    id: usize,
    bound: f64,
    decisions: Vec<Decision>,
}

impl PartialEq for BpNode {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for BpNode {}

impl PartialOrd for BpNode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for BpNode {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound.total_cmp(&other.bound).then_with(|| other.id.cmp(&self.id))
    }
}

fn improves(value: f64, incumbent: f64) -> bool {
    incumbent == f64::NEG_INFINITY || value > incumbent + TOL_GAP * (1.0 + incumbent.abs())
}

enum NodeOutcome {
    Converged(LpSolution),
    TimeLimit,
}

struct Search<'a> {
    inst: &'a Instance,
    order: Vec<usize>,
    config: &'a ColgenConfig,
    pool: Pool,
    diagnostics: Diagnostics,
}

impl Search<'_> {
    /// Column generation at one branch node.
    fn converge(&mut self, engine: &mut dyn PricingEngine, master: &mut Master, decisions: &[Decision], node_id: usize) -> Result<NodeOutcome, SolveError> {
        let inst = self.inst;
        let forbidden: Vec<FixedBitSet> = (0..inst.ships.len()).map(|s| forbidden_nodes(inst, decisions, s)).collect();
        let mut lp = master.solve()?;
        let mut iteration = 0;
        loop {
            iteration += 1;
            let mut added = 0;
            let mut pending = Vec::new();
            for &s in &self.order {
                if self.config.deadline.is_some_and(|d| Instant::now() >= d) {
                    return Ok(NodeOutcome::TimeLimit);
                }
                let pen = master.penalty(&lp, decisions, s);
                let pi = lp.duals[master.convex[s].0];
                self.diagnostics.pricing_calls += 1;
                let col = match engine.price(s, &pen, &forbidden[s], self.config.deadline)? {
                    Priced::Column(c) => c,
                    Priced::Infeasible => continue,
                    Priced::TimeLimit => return Ok(NodeOutcome::TimeLimit),
                };
                let rc = col.value(&pen) - pi;
                if rc <= 1e-6 * (1.0 + lp.objective.abs()) {
                    continue;
                }
                let Some(idx) = self.pool.insert(col) else {
                    log::debug!("pricing repeated a pooled column for ship {}", inst.ships[s].id);
                    continue;
                };
                added += 1;
                if self.config.batched {
                    pending.push(idx);
                } else {
                    master.add(inst, decisions, idx, &self.pool.columns[idx]);
                    lp = master.solve()?;
                }
            }
            for idx in pending {
                master.add(inst, decisions, idx, &self.pool.columns[idx]);
            }
            if self.config.batched && added > 0 {
                lp = master.solve()?;
            }
            log::info!(
                "colgen node={node_id} iter={iteration} columns={} rmp={:.6}",
                self.pool.columns.len(),
                lp.objective
            );
            if added == 0 {
                return Ok(NodeOutcome::Converged(lp));
            }
        }
    }

    /// Most fractional coverage of a node, by type groups first and single
    /// ships second.
    fn branch_choice(&self, master: &Master, lp: &LpSolution) -> Option<(usize, Vec<bool>)> {
        let inst = self.inst;
        let types = inst.ship_types();
        let mut groups: Vec<Vec<bool>> = types
            .iter()
            .map(|t| inst.ships.iter().map(|s| s.ship_type == *t).collect())
            .collect();
        let type_groups = groups.len();
        groups.extend((0..inst.ships.len()).map(|s| (0..inst.ships.len()).map(|r| r == s).collect()));
        let mut cover = vec![vec![0.0; inst.visits.len()]; groups.len()];
        for (j, e) in master.entries.iter().enumerate() {
            let Entry::Column(k) = *e else { continue };
            let z = lp.values[j];
            if z <= 0.0 {
                continue;
            }
            let col = &self.pool.columns[k];
            for (g, group) in groups.iter().enumerate() {
                if group[col.ship] {
                    for i in col.nodes.ones() {
                        cover[g][i] += z;
                    }
                }
            }
        }
        for range in [0..type_groups, type_groups..groups.len()] {
            let mut best: Option<(f64, usize, usize)> = None;
            for g in range {
                for (i, &f) in cover[g].iter().enumerate() {
                    let frac = f.min(1.0 - f);
                    if frac > TOL_INT && best.is_none_or(|(b, _, _)| frac > b) {
                        best = Some((frac, g, i));
                    }
                }
            }
            if let Some((_, g, i)) = best {
                return Some((i, groups[g].clone()));
            }
        }
        None
    }
}

fn is_integral(lp: &LpSolution) -> bool {
    lp.values.iter().all(|&v| (v - v.round()).abs() <= TOL_INT)
}

/// Column generation with branching; `engine` solves the pricing problems.
pub fn run_column_generation(inst: &Instance, reach: &ReachIndex, engine: &mut dyn PricingEngine, config: &ColgenConfig) -> Result<Solution, SolveError> {
    let start = Instant::now();
    let mut search = Search {
        inst,
        order: ships_by_path_count(reach, true),
        config,
        pool: Pool::default(),
        diagnostics: Diagnostics::default(),
    };
    let mut timed_out = false;
    for col in initial_columns(inst, reach, engine, config.deadline)? {
        search.pool.insert(col);
    }
    let floor = -inst.money_scale() - 1.0;
    let mut incumbent: Option<(f64, Vec<usize>)> = None;
    let mut heap = BinaryHeap::new();
    heap.push(BpNode {
        id: 0,
        bound: f64::INFINITY,
        decisions: Vec::new(),
    });
    let mut next_id = 1;
    let mut open_bound = f64::NEG_INFINITY;
    while let Some(node) = heap.pop() {
        let best = incumbent.as_ref().map_or(f64::NEG_INFINITY, |i| i.0);
        if !improves(node.bound, best) {
            continue;
        }
        search.diagnostics.branch_nodes += 1;
        let mut master = Master::new(inst, &node.decisions);
        for (k, col) in search.pool.columns.iter().enumerate() {
            if allowed(col, &node.decisions) {
                master.add(inst, &node.decisions, k, col);
            }
        }
        let lp = match search.converge(engine, &mut master, &node.decisions, node.id)? {
            NodeOutcome::Converged(lp) => lp,
            NodeOutcome::TimeLimit => {
                timed_out = true;
                open_bound = open_bound.max(node.bound);
                break;
            }
        };
        let integral = is_integral(&lp);
        if node.id == 0 {
            search.diagnostics.relaxed_master_integral = Some(integral);
            search.diagnostics.lp_bound = Some(lp.objective);
        }
        if lp.objective < floor || !improves(lp.objective, best) {
            continue;
        }
        if integral {
            let artificial = master
                .entries
                .iter()
                .zip(&lp.values)
                .any(|(e, &v)| !matches!(e, Entry::Column(_)) && v > 0.5);
            if artificial {
                continue;
            }
            let mut chosen = vec![usize::MAX; inst.ships.len()];
            for (e, &v) in master.entries.iter().zip(&lp.values) {
                if let (Entry::Column(k), true) = (e, v > 0.5) {
                    chosen[search.pool.columns[*k].ship] = *k;
                }
            }
            let value: f64 = chosen.iter().map(|&k| search.pool.columns[k].profit).sum();
            incumbent = Some((value, chosen));
            continue;
        }
        let Some((i, group)) = search.branch_choice(&master, &lp) else {
            return Err(SolveError::Numerical("fractional master without a fractional node coverage".into()));
        };
        for keep in [false, true] {
            let mut decisions = node.decisions.clone();
            decisions.push(Decision {
                node: i,
                group: group.clone(),
                keep,
            });
            heap.push(BpNode {
                id: next_id,
                bound: lp.objective,
                decisions,
            });
            next_id += 1;
        }
    }
    if timed_out {
        open_bound = heap.iter().map(|n| n.bound).fold(open_bound, f64::max);
    }

    let mut diagnostics = std::mem::take(&mut search.diagnostics);
    diagnostics.columns = search.pool.columns.len();
    diagnostics.model_size = engine.model_size();
    engine.report(&mut diagnostics);
    let status = match (&incumbent, timed_out) {
        (_, true) => SolveStatus::TimeLimit,
        (Some(_), false) => SolveStatus::Optimal,
        (None, false) => SolveStatus::Infeasible,
    };
    let mut sol = Solution::without_routing(Method::Colgen, status, inst.ships.len());
    if let Some((value, chosen)) = incumbent {
        for &k in &chosen {
            let col = &search.pool.columns[k];
            sol.paths[col.ship] = col.path.clone();
            sol.demand_flows.extend(col.demand_flows.iter().cloned());
            sol.empty_flows.extend(col.empty_flows.iter().cloned());
        }
        sol.demand_flows.sort_by_key(|f| (f.demand, f.ship, f.destination));
        sol.empty_flows.sort_by_key(|f| (f.ship, f.from, f.to, f.cargo_type));
        sol.objective = value;
    }
    sol.bound = if timed_out { open_bound } else { sol.objective };
    sol.diagnostics = diagnostics;
    sol.wall_seconds = start.elapsed().as_secs_f64();
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn run(inst: &Instance, batched: bool) -> Solution {
        let reach = ReachIndex::new(inst).unwrap();
        let mut engine = ArcFlowPricing::new(inst, &reach);
        let config = ColgenConfig { deadline: None, batched };
        run_column_generation(inst, &reach, &mut engine, &config).unwrap()
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
            (fixtures::shared_corridor(), 555.0),
            (fixtures::pure_repositioning(), -42.0),
            (fixtures::fractional_master(), -20.0),
        ];
        for (inst, want) in cases {
            for batched in [false, true] {
                let sol = run(&inst, batched);
                assert_eq!(sol.status, SolveStatus::Optimal, "{}", inst.name);
                assert!((sol.objective - want).abs() < 1e-6, "{}: {}", inst.name, sol.objective);
                let eval = evaluate_objective(&inst, &sol).unwrap();
                assert!((eval - want).abs() < 1e-6, "{}: {eval}", inst.name);
                assert!(crate::solution::verify_solution(&inst, &sol).is_empty());
            }
        }
    }

    #[test]
    fn t1_converges_at_the_root() {
        let sol = run(&fixtures::t1(), false);
        assert_eq!(sol.diagnostics.branch_nodes, 1);
        assert_eq!(sol.diagnostics.relaxed_master_integral, Some(true));
    }

    #[test]
    fn identical_ships_can_leave_the_master_fractional() {
        let sol = run(&fixtures::fractional_master(), false);
        assert_eq!(sol.diagnostics.relaxed_master_integral, Some(false));
        assert!(sol.diagnostics.lp_bound.unwrap() >= 220.0 - 1e-6);
        assert!((sol.objective + 20.0).abs() < 1e-6);
        assert!(sol.diagnostics.branch_nodes > 1);
    }

    #[test]
    fn zero_duals_price_the_best_path() {
        let inst = fixtures::t1();
        let reach = ReachIndex::new(&inst).unwrap();
        let mut engine = ArcFlowPricing::new(&inst, &reach);
        let none = FixedBitSet::with_capacity(3);
        let Priced::Column(c) = engine.price(0, &[0.0; 3], &none, None).unwrap() else { panic!() };
        assert_eq!(c.path, vec![0, 1, 2, 3]);
        assert!((c.profit - 676.0).abs() < 1e-6);
    }

    #[test]
    fn a_heavy_node_price_diverts_the_path() {
        let inst = fixtures::t1();
        let reach = ReachIndex::new(&inst).unwrap();
        let mut engine = ArcFlowPricing::new(&inst, &reach);
        let none = FixedBitSet::with_capacity(3);
        let Priced::Column(c) = engine.price(0, &[0.0, 1000.0, 0.0], &none, None).unwrap() else { panic!() };
        // v0 -> tau (profit 0) beats v0 -> v2 -> tau (profit -17).
        assert_eq!(c.path, vec![0, 3]);
        assert!(c.profit.abs() < 1e-9);
    }

    #[test]
    fn master_prefers_a_real_column_to_the_dummy() {
        let inst = fixtures::t1();
        let reach = ReachIndex::new(&inst).unwrap();
        let mut engine = ArcFlowPricing::new(&inst, &reach);
        let cols = initial_columns(&inst, &reach, &mut engine, None).unwrap();
        assert_eq!(cols.len(), 1);
        let rmp = solve_rmp(&inst, &cols, true).unwrap();
        assert!((rmp.objective - 676.0).abs() < 1e-6);
        assert!((rmp.values[0] - 1.0).abs() < 1e-9 && rmp.dummies[0].abs() < 1e-9);
    }

    #[test]
    fn conflicting_columns_leave_one_ship_on_its_dummy() {
        let inst = fixtures::shared_corridor();
        let col = |ship: usize, path: Vec<usize>, profit: f64| {
            let mut nodes = FixedBitSet::with_capacity(3);
            for &v in &path[..path.len() - 1] {
                nodes.insert(v);
            }
            Column {
                ship,
                path,
                nodes,
                demand_flows: Vec::new(),
                empty_flows: Vec::new(),
                profit,
            }
        };
        let cols = vec![col(0, vec![0, 2, 3], 100.0), col(1, vec![1, 2, 3], 50.0)];
        let rmp = solve_rmp(&inst, &cols, false).unwrap();
        assert_eq!(rmp.values, vec![1.0, 0.0]);
        assert_eq!(rmp.dummies, vec![0.0, 1.0]);
    }
}
