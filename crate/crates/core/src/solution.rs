//! Solver-independent solutions and their evaluation from raw instance data.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::instance::{CargoType, Instance};
use crate::lp::{ModelSize, TOL_FEAS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Reduced,
    ReducedTight,
    Revised,
    Colgen,
    ColgenLazy,
    Oracle,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Reduced,
        Method::ReducedTight,
        Method::Revised,
        Method::Colgen,
        Method::ColgenLazy,
        Method::Oracle,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Reduced => "reduced",
            Method::ReducedTight => "reduced-tight",
            Method::Revised => "revised",
            Method::Colgen => "colgen",
            Method::ColgenLazy => "colgen-lazy",
            Method::Oracle => "oracle",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        Method::ALL.into_iter().find(|m| m.as_str() == s)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    /// Stopped by the time limit; the incumbent (if any) is reported.
    TimeLimit,
    /// No node-disjoint routing of all ships exists.
    Infeasible,
    /// The oracle declined because the instance exceeds its budget.
    Refused,
    /// The LP engine broke down numerically.
    NumericalFailure,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::TimeLimit => "time_limit",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Refused => "refused",
            SolveStatus::NumericalFailure => "numerical_failure",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DemandFlow {
    pub ship: usize,
    pub demand: usize,
    pub destination: usize,
    pub amount: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmptyFlow {
    pub ship: usize,
    pub cargo_type: CargoType,
    pub from: usize,
    pub to: usize,
    pub amount: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ShipDiagnostics {
    pub ship: String,
    pub gamma_dc: usize,
    pub gamma_rf: usize,
    pub splits: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Columns in the final master, dummies excluded.
    pub columns: usize,
    pub pricing_calls: usize,
    pub branch_nodes: usize,
    /// Lazy rows added over the run, per scope.
    pub cuts_dc: usize,
    pub cuts_rf: usize,
    pub separation_calls: usize,
    pub ships: Vec<ShipDiagnostics>,
    /// Whether the relaxed master was integral when column generation first
    /// converged.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relaxed_master_integral: Option<bool>,
    /// Size of the model handed to the solver (for column generation, the
    /// largest pricing model).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_size: Option<ModelSize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lp_bound: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub method: Method,
    pub status: SolveStatus,
    /// Profit in money; `-inf` without a routing.
    pub objective: f64,
    /// Proven upper bound on the optimum.
    pub bound: f64,
    /// Node sequence of each ship, start to sink; empty without a routing.
    pub paths: Vec<Vec<usize>>,
    pub demand_flows: Vec<DemandFlow>,
    pub empty_flows: Vec<EmptyFlow>,
    pub diagnostics: Diagnostics,
    pub wall_seconds: f64,
}

impl Solution {
    pub fn without_routing(method: Method, status: SolveStatus, ships: usize) -> Solution {
        Solution {
            method,
            status,
            objective: f64::NEG_INFINITY,
            bound: f64::INFINITY,
            paths: vec![Vec::new(); ships],
            demand_flows: Vec::new(),
            empty_flows: Vec::new(),
            diagnostics: Diagnostics::default(),
            wall_seconds: 0.0,
        }
    }

    pub fn has_routing(&self) -> bool {
        self.paths.iter().all(|p| !p.is_empty())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("ship {0}: {1}")]
    Path(String, String),
    #[error("flow of {what} on ship {ship} is not on that ship's path")]
    OffPath { what: String, ship: String },
    #[error("solution has {found} paths, instance has {expected} ships")]
    ShipCount { found: usize, expected: usize },
}

fn position(path: &[usize], node: usize) -> Option<usize> {
    path.iter().position(|&v| v == node)
}

/// Recomputes the profit of `sol` from the instance data: cargo margins minus
/// sailing costs and port fees.
pub fn evaluate_objective(inst: &Instance, sol: &Solution) -> Result<f64, EvalError> {
    if sol.paths.len() != inst.ships.len() {
        return Err(EvalError::ShipCount {
            found: sol.paths.len(),
            expected: inst.ships.len(),
        });
    }
    let mut total = 0.0;
    for (s, path) in sol.paths.iter().enumerate() {
        if path.is_empty() {
            continue;
        }
        let ship = &inst.ships[s];
        let err = |m: &str| EvalError::Path(ship.id.clone(), m.to_string());
        if path[0] != ship.start {
            return Err(err("path does not begin at the start visit"));
        }
        if *path.last().unwrap() != inst.sink() {
            return Err(err("path does not end at the sink"));
        }
        for w in path.windows(2) {
            let arc = inst
                .arcs
                .iter()
                .position(|a| a.from == w[0] && a.to == w[1])
                .ok_or_else(|| err("path uses a missing arc"))?;
            total -= inst.sail_cost(arc, s).money();
            total -= inst.port_fee(w[1], s).money();
        }
    }
    for f in &sol.demand_flows {
        let d = &inst.demands[f.demand];
        let path = &sol.paths[f.ship];
        let off = || EvalError::OffPath {
            what: d.id.clone(),
            ship: inst.ships[f.ship].id.clone(),
        };
        let o = position(path, d.origin).ok_or_else(off)?;
        let j = position(path, f.destination).ok_or_else(off)?;
        if j <= o {
            return Err(off());
        }
        let margin = d.revenue.money() - inst.move_cost(d.origin).money() - inst.move_cost(f.destination).money();
        total += f.amount * margin;
    }
    for f in &sol.empty_flows {
        let path = &sol.paths[f.ship];
        let off = || EvalError::OffPath {
            what: format!("empty {} {}->{}", f.cargo_type, inst.node_id(f.from), inst.node_id(f.to)),
            ship: inst.ships[f.ship].id.clone(),
        };
        let o = position(path, f.from).ok_or_else(off)?;
        let j = position(path, f.to).ok_or_else(off)?;
        if j <= o {
            return Err(off());
        }
        let margin = inst.empty_revenue[f.cargo_type.index()].money()
            - inst.move_cost(f.from).money()
            - inst.move_cost(f.to).money();
        total += f.amount * margin;
    }
    Ok(total)
}

/// Every feasibility violation of `sol`, checked against raw instance data.
pub fn verify_solution(inst: &Instance, sol: &Solution) -> Vec<String> {
    let mut out = Vec::new();
    if let Err(e) = evaluate_objective(inst, sol) {
        out.push(e.to_string());
        return out;
    }
    if !sol.has_routing() {
        if !sol.demand_flows.is_empty() || !sol.empty_flows.is_empty() {
            out.push("flows without a routing".into());
        }
        return out;
    }
    let mut owner = vec![None; inst.visits.len()];
    for (s, path) in sol.paths.iter().enumerate() {
        for &v in &path[..path.len() - 1] {
            if let Some(other) = owner[v].replace(s) {
                out.push(format!(
                    "visit {} used by ships {} and {}",
                    inst.node_id(v),
                    inst.ships[other].id,
                    inst.ships[s].id
                ));
            }
        }
    }
    let mut carried = vec![0.0; inst.demands.len()];
    for f in &sol.demand_flows {
        if f.amount < -TOL_FEAS {
            out.push(format!("negative flow of {}", inst.demands[f.demand].id));
        }
        if !inst.demands[f.demand].destinations.contains(&f.destination) {
            out.push(format!(
                "{} delivered to {}, which is not a destination",
                inst.demands[f.demand].id,
                inst.node_id(f.destination)
            ));
        }
        carried[f.demand] += f.amount;
    }
    for (m, d) in inst.demands.iter().enumerate() {
        if carried[m] > d.amount as f64 + TOL_FEAS {
            out.push(format!("{} carried {} of {}", d.id, carried[m], d.amount));
        }
    }
    let mut moved = vec![0.0; inst.empty_points.len()];
    for f in &sol.empty_flows {
        if f.amount < -TOL_FEAS {
            out.push("negative empty flow".into());
        }
        let find = |visit: usize, sign: i64| {
            inst.empty_points
                .iter()
                .position(|p| p.visit == visit && p.cargo_type == f.cargo_type && p.amount.signum() == sign)
        };
        match (find(f.from, 1), find(f.to, -1)) {
            (Some(a), Some(b)) => {
                moved[a] += f.amount;
                moved[b] += f.amount;
            }
            _ => out.push(format!(
                "empty flow {}->{} is not a surplus/deficit pair",
                inst.node_id(f.from),
                inst.node_id(f.to)
            )),
        }
    }
    for (k, p) in inst.empty_points.iter().enumerate() {
        if moved[k] > p.amount.unsigned_abs() as f64 + TOL_FEAS {
            out.push(format!(
                "empty point at {} moves {} of {}",
                inst.node_id(p.visit),
                moved[k],
                p.amount.unsigned_abs()
            ));
        }
    }
    for (s, path) in sol.paths.iter().enumerate() {
        let ship = &inst.ships[s];
        // Load on each leg: index t is the arc path[t] -> path[t+1].
        let legs = path.len() - 1;
        let mut dc = vec![0.0; legs];
        let mut rf = vec![0.0; legs];
        let mut add = |from: usize, to: usize, amount: f64, plug: bool| {
            let a = position(path, from).unwrap();
            let b = position(path, to).unwrap();
            for t in a..b {
                dc[t] += amount;
                if plug {
                    rf[t] += amount;
                }
            }
        };
        for f in sol.demand_flows.iter().filter(|f| f.ship == s) {
            let d = &inst.demands[f.demand];
            add(d.origin, f.destination, f.amount, d.cargo_type == CargoType::Rf);
        }
        for f in sol.empty_flows.iter().filter(|f| f.ship == s) {
            add(f.from, f.to, f.amount, false);
        }
        for t in 0..legs {
            let leg = format!("{}->{}", inst.node_id(path[t]), inst.node_id(path[t + 1]));
            if dc[t] > ship.capacity_dc as f64 + TOL_FEAS {
                out.push(format!("ship {} carries {} TEU on {leg}, capacity {}", ship.id, dc[t], ship.capacity_dc));
            }
            if rf[t] > ship.capacity_rf as f64 + TOL_FEAS {
                out.push(format!(
                    "ship {} carries {} reefers on {leg}, capacity {}",
                    ship.id, rf[t], ship.capacity_rf
                ));
            }
        }
    }
    out
}
