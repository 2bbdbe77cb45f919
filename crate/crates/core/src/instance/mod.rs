//! Problem data: the time-space graph, ships, cargo and empty equipment.
//!
//! Nodes are numbered `0..visits.len()` for visits and `visits.len()` for the
//! sink. All money is held in integer cents.

mod reach;
mod validate;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use reach::{path_count, Commodity, CommodityKind, EmptyPair, ReachError, ReachIndex};
pub use validate::{validate, Issue, IssueKind, ValidationReport};

/// An amount of money in cents.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Cents(pub i64);

impl Cents {
    pub const ZERO: Cents = Cents(0);

    /// The amount in currency units, as used inside the solvers.
    pub fn money(self) -> f64 {
        self.0 as f64 / 100.0
    }
}

impl fmt::Display for Cents {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        write!(f, "{sign}{}.{:02}", self.0.unsigned_abs() / 100, self.0.unsigned_abs() % 100)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CargoType {
    Dc,
    Rf,
}

impl CargoType {
    pub const ALL: [CargoType; 2] = [CargoType::Dc, CargoType::Rf];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CargoType::Dc => "dc",
            CargoType::Rf => "rf",
        }
    }
}

impl fmt::Display for CargoType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ship {
    pub id: String,
    pub start: usize,
    pub capacity_dc: u32,
    pub capacity_rf: u32,
    pub ship_type: String,
}

impl Ship {
    pub fn capacity(&self, q: CargoType) -> u32 {
        match q {
            CargoType::Dc => self.capacity_dc,
            CargoType::Rf => self.capacity_rf,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Visit {
    pub id: String,
    /// Physical port; visits of one port share move costs by convention.
    pub port: Option<String>,
    pub time_index: i64,
    pub port_fee: Cents,
    /// Per ship type overrides of `port_fee`.
    pub port_fee_by_type: BTreeMap<String, Cents>,
    pub move_cost: Cents,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arc {
    pub from: usize,
    pub to: usize,
    pub sail_cost: Cents,
    /// Per ship type overrides of `sail_cost`.
    pub sail_cost_by_type: BTreeMap<String, Cents>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Demand {
    pub id: String,
    pub origin: usize,
    pub destinations: Vec<usize>,
    pub cargo_type: CargoType,
    pub amount: u32,
    pub revenue: Cents,
}

/// Empty equipment at a visit: positive is a surplus, negative a deficit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmptyPoint {
    pub visit: usize,
    pub cargo_type: CargoType,
    pub amount: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Instance {
    pub name: String,
    pub sink_id: String,
    pub ships: Vec<Ship>,
    pub visits: Vec<Visit>,
    pub arcs: Vec<Arc>,
    pub demands: Vec<Demand>,
    pub empty_points: Vec<EmptyPoint>,
    /// Revenue per TEU of empty equipment delivered, indexed by [`CargoType::index`].
    pub empty_revenue: [Cents; 2],
}

impl Instance {
    pub fn sink(&self) -> usize {
        self.visits.len()
    }

    pub fn num_nodes(&self) -> usize {
        self.visits.len() + 1
    }

    pub fn node_id(&self, node: usize) -> &str {
        if node == self.sink() {
            &self.sink_id
        } else {
            &self.visits[node].id
        }
    }

    pub fn is_sink_arc(&self, arc: usize) -> bool {
        self.arcs[arc].to == self.sink()
    }

    pub fn sail_cost(&self, arc: usize, ship: usize) -> Cents {
        let a = &self.arcs[arc];
        *a.sail_cost_by_type.get(&self.ships[ship].ship_type).unwrap_or(&a.sail_cost)
    }

    /// Fee charged to `ship` for entering `node`; zero at the sink.
    pub fn port_fee(&self, node: usize, ship: usize) -> Cents {
        if node == self.sink() {
            return Cents::ZERO;
        }
        let v = &self.visits[node];
        *v.port_fee_by_type.get(&self.ships[ship].ship_type).unwrap_or(&v.port_fee)
    }

    pub fn move_cost(&self, node: usize) -> Cents {
        self.visits[node].move_cost
    }

    pub fn ship_index(&self, id: &str) -> Option<usize> {
        self.ships.iter().position(|s| s.id == id)
    }

    pub fn visit_index(&self, id: &str) -> Option<usize> {
        if id == self.sink_id {
            return Some(self.sink());
        }
        self.visits.iter().position(|v| v.id == id)
    }

    /// Distinct ship types in order of first appearance.
    pub fn ship_types(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for s in &self.ships {
            if !out.contains(&s.ship_type.as_str()) {
                out.push(&s.ship_type);
            }
        }
        out
    }

    /// Copy with the empty-equipment revenue replaced for every type.
    pub fn with_empty_revenue(&self, revenue: Cents) -> Instance {
        let mut out = self.clone();
        out.empty_revenue = [revenue; 2];
        out
    }

    /// Arcs out of each node, in input order.
    pub fn out_arcs(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_nodes()];
        for (k, a) in self.arcs.iter().enumerate() {
            if a.from < out.len() {
                out[a.from].push(k);
            }
        }
        out
    }

    /// Arcs into each node, in input order.
    pub fn in_arcs(&self) -> Vec<Vec<usize>> {
        let mut inn = vec![Vec::new(); self.num_nodes()];
        for (k, a) in self.arcs.iter().enumerate() {
            if a.to < inn.len() {
                inn[a.to].push(k);
            }
        }
        inn
    }

    /// Sum of all cost and revenue magnitudes, in money. Used to scale
    /// artificial penalties.
    pub fn money_scale(&self) -> f64 {
        let sail: f64 = self
            .arcs
            .iter()
            .map(|a| {
                a.sail_cost_by_type
                    .values()
                    .map(|c| c.money().abs())
                    .fold(a.sail_cost.money().abs(), f64::max)
            })
            .sum();
        let fees: f64 = self
            .visits
            .iter()
            .map(|v| {
                v.port_fee_by_type
                    .values()
                    .map(|c| c.money().abs())
                    .fold(v.port_fee.money().abs(), f64::max)
            })
            .sum();
        let cargo: f64 = self
            .demands
            .iter()
            .map(|d| d.amount as f64 * d.revenue.money().abs())
            .sum();
        let empties: f64 = self
            .empty_points
            .iter()
            .filter(|p| p.amount > 0)
            .map(|p| p.amount as f64 * self.empty_revenue[p.cargo_type.index()].money().abs())
            .sum();
        sail + fees + cargo + empties
    }
}
