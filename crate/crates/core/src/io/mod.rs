//! JSON instance and solution files, and the random instance generator.

mod generate;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::instance::{validate, Arc, CargoType, Cents, Demand, EmptyPoint, Instance, Ship, ValidationReport, Visit};
use crate::solution::{DemandFlow, Diagnostics, EmptyFlow, Method, Solution, SolveStatus};

pub use generate::{generate_random, GeneratorError, GeneratorParams};

pub const INSTANCE_SCHEMA: &str = "lsfrp-instance-v1";
pub const SOLUTION_SCHEMA: &str = "lsfrp-solution-v1";

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("expected schema {expected:?}, found {found:?}")]
    Schema { expected: &'static str, found: String },
    #[error("{path}: unknown {what} {id:?}")]
    Reference { path: String, what: &'static str, id: String },
    #[error("{path}: {message}")]
    Field { path: String, message: String },
    #[error("invalid instance:\n{0}")]
    Invalid(ValidationReport),
}

fn is_empty_map(m: &BTreeMap<String, Cents>) -> bool {
    m.is_empty()
}

fn default_type() -> String {
    "default".into()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    schema: String,
    #[serde(default)]
    name: String,
    sink: String,
    ships: Vec<ShipRec>,
    visits: Vec<VisitRec>,
    arcs: Vec<ArcRec>,
    #[serde(default)]
    demands: Vec<DemandRec>,
    #[serde(default)]
    empty_points: Vec<EmptyPointRec>,
    #[serde(default)]
    empty_revenue: PerType,
}

#[derive(Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct PerType {
    #[serde(default)]
    dc: Cents,
    #[serde(default)]
    rf: Cents,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ShipRec {
    id: String,
    start: String,
    capacity_dc: u32,
    capacity_rf: u32,
    #[serde(default = "default_type")]
    ship_type: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VisitRec {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    port: Option<String>,
    #[serde(default)]
    time_index: i64,
    #[serde(default)]
    port_fee: Cents,
    #[serde(default, skip_serializing_if = "is_empty_map")]
    port_fee_by_type: BTreeMap<String, Cents>,
    #[serde(default)]
    move_cost: Cents,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArcRec {
    from: String,
    to: String,
    #[serde(default)]
    sail_cost: Cents,
    #[serde(default, skip_serializing_if = "is_empty_map")]
    sail_cost_by_type: BTreeMap<String, Cents>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DemandRec {
    id: String,
    origin: String,
    destinations: Vec<String>,
    cargo_type: CargoType,
    amount: u32,
    revenue: Cents,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EmptyPointRec {
    visit: String,
    cargo_type: CargoType,
    amount: i64,
}

struct Resolver<'a> {
    ids: BTreeMap<&'a str, usize>,
}

impl<'a> Resolver<'a> {
    fn node(&self, id: &str, path: impl FnOnce() -> String) -> Result<usize, IoError> {
        self.ids.get(id).copied().ok_or_else(|| IoError::Reference {
            path: path(),
            what: "visit",
            id: id.to_string(),
        })
    }
}

/// Parses and validates an instance file.
pub fn parse_instance(text: &str) -> Result<Instance, IoError> {
    let inst = parse_instance_unchecked(text)?;
    let report = validate(&inst);
    if !report.is_ok() {
        return Err(IoError::Invalid(report));
    }
    Ok(inst)
}

/// Parses an instance file, resolving references but skipping validation.
pub fn parse_instance_unchecked(text: &str) -> Result<Instance, IoError> {
    let file: InstanceFile = serde_json::from_str(text)?;
    if file.schema != INSTANCE_SCHEMA {
        return Err(IoError::Schema {
            expected: INSTANCE_SCHEMA,
            found: file.schema,
        });
    }
    let mut ids = BTreeMap::new();
    for (k, v) in file.visits.iter().enumerate() {
        if ids.insert(v.id.as_str(), k).is_some() || v.id == file.sink {
            return Err(IoError::Field {
                path: format!("visits[{k}].id"),
                message: format!("duplicate id {:?}", v.id),
            });
        }
    }
    ids.insert(file.sink.as_str(), file.visits.len());
    let res = Resolver { ids };

    let ships = file
        .ships
        .iter()
        .enumerate()
        .map(|(k, s)| {
            Ok(Ship {
                id: s.id.clone(),
                start: res.node(&s.start, || format!("ships[{k}].start"))?,
                capacity_dc: s.capacity_dc,
                capacity_rf: s.capacity_rf,
                ship_type: s.ship_type.clone(),
            })
        })
        .collect::<Result<Vec<_>, IoError>>()?;
    let arcs = file
        .arcs
        .iter()
        .enumerate()
        .map(|(k, a)| {
            Ok(Arc {
                from: res.node(&a.from, || format!("arcs[{k}].from"))?,
                to: res.node(&a.to, || format!("arcs[{k}].to"))?,
                sail_cost: a.sail_cost,
                sail_cost_by_type: a.sail_cost_by_type.clone(),
            })
        })
        .collect::<Result<Vec<_>, IoError>>()?;
    let demands = file
        .demands
        .iter()
        .enumerate()
        .map(|(k, d)| {
            Ok(Demand {
                id: d.id.clone(),
                origin: res.node(&d.origin, || format!("demands[{k}].origin"))?,
                destinations: d
                    .destinations
                    .iter()
                    .enumerate()
                    .map(|(j, id)| res.node(id, || format!("demands[{k}].destinations[{j}]")))
                    .collect::<Result<_, _>>()?,
                cargo_type: d.cargo_type,
                amount: d.amount,
                revenue: d.revenue,
            })
        })
        .collect::<Result<Vec<_>, IoError>>()?;
    let empty_points = file
        .empty_points
        .iter()
        .enumerate()
        .map(|(k, p)| {
            Ok(EmptyPoint {
                visit: res.node(&p.visit, || format!("empty_points[{k}].visit"))?,
                cargo_type: p.cargo_type,
                amount: p.amount,
            })
        })
        .collect::<Result<Vec<_>, IoError>>()?;
    let visits = file
        .visits
        .into_iter()
        .map(|v| Visit {
            id: v.id,
            port: v.port,
            time_index: v.time_index,
            port_fee: v.port_fee,
            port_fee_by_type: v.port_fee_by_type,
            move_cost: v.move_cost,
        })
        .collect();
    Ok(Instance {
        name: file.name,
        sink_id: file.sink,
        ships,
        visits,
        arcs,
        demands,
        empty_points,
        empty_revenue: [file.empty_revenue.dc, file.empty_revenue.rf],
    })
}

/// Serialises an instance; the output is a pure function of the instance.
pub fn write_instance(inst: &Instance) -> String {
    let id = |v: usize| inst.node_id(v).to_string();
    let file = InstanceFile {
        schema: INSTANCE_SCHEMA.into(),
        name: inst.name.clone(),
        sink: inst.sink_id.clone(),
        ships: inst
            .ships
            .iter()
            .map(|s| ShipRec {
                id: s.id.clone(),
                start: id(s.start),
                capacity_dc: s.capacity_dc,
                capacity_rf: s.capacity_rf,
                ship_type: s.ship_type.clone(),
            })
            .collect(),
        visits: inst
            .visits
            .iter()
            .map(|v| VisitRec {
                id: v.id.clone(),
                port: v.port.clone(),
                time_index: v.time_index,
                port_fee: v.port_fee,
                port_fee_by_type: v.port_fee_by_type.clone(),
                move_cost: v.move_cost,
            })
            .collect(),
        arcs: inst
            .arcs
            .iter()
            .map(|a| ArcRec {
                from: id(a.from),
                to: id(a.to),
                sail_cost: a.sail_cost,
                sail_cost_by_type: a.sail_cost_by_type.clone(),
            })
            .collect(),
        demands: inst
            .demands
            .iter()
            .map(|d| DemandRec {
                id: d.id.clone(),
                origin: id(d.origin),
                destinations: d.destinations.iter().map(|&v| id(v)).collect(),
                cargo_type: d.cargo_type,
                amount: d.amount,
                revenue: d.revenue,
            })
            .collect(),
        empty_points: inst
            .empty_points
            .iter()
            .map(|p| EmptyPointRec {
                visit: id(p.visit),
                cargo_type: p.cargo_type,
                amount: p.amount,
            })
            .collect(),
        empty_revenue: PerType {
            dc: inst.empty_revenue[0],
            rf: inst.empty_revenue[1],
        },
    };
    let mut text = serde_json::to_string_pretty(&file).expect("instance serialises");
    text.push('\n');
    text
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolutionFile {
    schema: String,
    instance: String,
    method: String,
    status: SolveStatus,
    objective: Option<f64>,
    bound: Option<f64>,
    ships: Vec<RouteRec>,
    demand_flows: Vec<DemandFlowRec>,
    empty_flows: Vec<EmptyFlowRec>,
    diagnostics: Diagnostics,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    metadata: BTreeMap<String, String>,
    timing: Timing,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Timing {
    wall_seconds: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RouteRec {
    ship: String,
    path: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DemandFlowRec {
    demand: String,
    ship: String,
    destination: String,
    amount: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EmptyFlowRec {
    ship: String,
    cargo_type: CargoType,
    from: String,
    to: String,
    amount: f64,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// Serialises a solution. Everything but the `timing` block is a pure
/// function of the solution; `metadata` carries run parameters such as seeds.
pub fn write_solution(inst: &Instance, sol: &Solution, metadata: &BTreeMap<String, String>) -> String {
    let id = |v: usize| inst.node_id(v).to_string();
    let file = SolutionFile {
        schema: SOLUTION_SCHEMA.into(),
        instance: inst.name.clone(),
        method: sol.method.as_str().into(),
        status: sol.status,
        objective: finite(sol.objective),
        bound: finite(sol.bound),
        ships: sol
            .paths
            .iter()
            .enumerate()
            .map(|(s, p)| RouteRec {
                ship: inst.ships[s].id.clone(),
                path: p.iter().map(|&v| id(v)).collect(),
            })
            .collect(),
        demand_flows: sol
            .demand_flows
            .iter()
            .map(|f| DemandFlowRec {
                demand: inst.demands[f.demand].id.clone(),
                ship: inst.ships[f.ship].id.clone(),
                destination: id(f.destination),
                amount: f.amount,
            })
            .collect(),
        empty_flows: sol
            .empty_flows
            .iter()
            .map(|f| EmptyFlowRec {
                ship: inst.ships[f.ship].id.clone(),
                cargo_type: f.cargo_type,
                from: id(f.from),
                to: id(f.to),
                amount: f.amount,
            })
            .collect(),
        diagnostics: sol.diagnostics.clone(),
        metadata: metadata.clone(),
        timing: Timing {
            wall_seconds: sol.wall_seconds,
        },
    };
    let mut text = serde_json::to_string_pretty(&file).expect("solution serialises");
    text.push('\n');
    text
}

/// Parses a solution file against the instance it was written for.
pub fn parse_solution(inst: &Instance, text: &str) -> Result<(Solution, BTreeMap<String, String>), IoError> {
    let file: SolutionFile = serde_json::from_str(text)?;
    if file.schema != SOLUTION_SCHEMA {
        return Err(IoError::Schema {
            expected: SOLUTION_SCHEMA,
            found: file.schema,
        });
    }
    let method = Method::parse(&file.method).ok_or_else(|| IoError::Field {
        path: "method".into(),
        message: format!("unknown method {:?}", file.method),
    })?;
    let node = |id: &str, path: String| {
        inst.visit_index(id).ok_or(IoError::Reference {
            path,
            what: "visit",
            id: id.to_string(),
        })
    };
    let ship = |id: &str, path: String| {
        inst.ship_index(id).ok_or(IoError::Reference {
            path,
            what: "ship",
            id: id.to_string(),
        })
    };
    let mut paths = vec![Vec::new(); inst.ships.len()];
    for (k, r) in file.ships.iter().enumerate() {
        let s = ship(&r.ship, format!("ships[{k}].ship"))?;
        paths[s] = r
            .path
            .iter()
            .enumerate()
            .map(|(j, v)| node(v, format!("ships[{k}].path[{j}]")))
            .collect::<Result<_, _>>()?;
    }
    let demand_flows = file
        .demand_flows
        .iter()
        .enumerate()
        .map(|(k, f)| {
            Ok(DemandFlow {
                ship: ship(&f.ship, format!("demand_flows[{k}].ship"))?,
                demand: inst.demands.iter().position(|d| d.id == f.demand).ok_or(IoError::Reference {
                    path: format!("demand_flows[{k}].demand"),
                    what: "demand",
                    id: f.demand.clone(),
                })?,
                destination: node(&f.destination, format!("demand_flows[{k}].destination"))?,
                amount: f.amount,
            })
        })
        .collect::<Result<Vec<_>, IoError>>()?;
    let empty_flows = file
        .empty_flows
        .iter()
        .enumerate()
        .map(|(k, f)| {
            Ok(EmptyFlow {
                ship: ship(&f.ship, format!("empty_flows[{k}].ship"))?,
                cargo_type: f.cargo_type,
                from: node(&f.from, format!("empty_flows[{k}].from"))?,
                to: node(&f.to, format!("empty_flows[{k}].to"))?,
                amount: f.amount,
            })
        })
        .collect::<Result<Vec<_>, IoError>>()?;
    Ok((
        Solution {
            method,
            status: file.status,
            objective: file.objective.unwrap_or(f64::NEG_INFINITY),
            bound: file.bound.unwrap_or(f64::INFINITY),
            paths,
            demand_flows,
            empty_flows,
            diagnostics: file.diagnostics,
            wall_seconds: file.timing.wall_seconds,
        },
        file.metadata,
    ))
}
