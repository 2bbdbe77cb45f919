use std::collections::{BTreeMap, BTreeSet};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::instance::{validate, Arc, CargoType, Cents, Demand, EmptyPoint, Instance, Ship, Visit};

/// Knobs of the layered instance generator. Money ranges are in cents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorParams {
    pub ships: usize,
    /// 1 or 2. With 2, odd ships get a second type with its own capacity and
    /// sailing costs.
    pub ship_types: usize,
    /// Visits including the ship starts, excluding the sink.
    pub visits: usize,
    /// Physical ports; visits of one port share a move cost. 0 picks
    /// `visits / 3`.
    pub ports: usize,
    /// Probability of each optional forward arc.
    pub density: f64,
    /// Longest forward jump (in visit order) of an optional arc.
    pub window: usize,
    pub demands: usize,
    pub reefer_fraction: f64,
    /// Share of demands offered to several visits of one port.
    pub multi_destination_fraction: f64,
    /// Draw move costs per visit instead of per port.
    pub unequal_destination_costs: bool,
    pub empty_points: usize,
    pub empty_revenue: i64,
    pub sail_cost: (i64, i64),
    pub port_fee: (i64, i64),
    pub move_cost: (i64, i64),
    pub revenue: (i64, i64),
    pub amount: (u32, u32),
    pub capacity_dc: (u32, u32),
    /// Reefer plugs as a share of total capacity.
    pub reefer_share: (f64, f64),
    pub seed: u64,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            ships: 3,
            ship_types: 1,
            visits: 14,
            ports: 0,
            density: 0.3,
            window: 4,
            demands: 10,
            reefer_fraction: 0.25,
            multi_destination_fraction: 0.3,
            unequal_destination_costs: false,
            empty_points: 0,
            empty_revenue: 0,
            sail_cost: (20_000, 120_000),
            port_fee: (2_000, 15_000),
            move_cost: (500, 4_000),
            revenue: (6_000, 25_000),
            amount: (5, 60),
            capacity_dc: (120, 300),
            reefer_share: (0.1, 0.4),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeneratorError {
    #[error("invalid generator parameters: {0}")]
    Params(String),
}

impl GeneratorParams {
    pub fn check(&self) -> Result<(), GeneratorError> {
        let fail = |m: &str| Err(GeneratorError::Params(m.into()));
        if self.ships == 0 {
            return fail("at least one ship is required");
        }
        if self.visits < self.ships {
            return fail("every ship needs its own start visit");
        }
        if !(self.ship_types == 1 || self.ship_types == 2) {
            return fail("ship_types must be 1 or 2");
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return fail("density must lie in (0, 1]");
        }
        for (name, v) in [
            ("reefer_fraction", self.reefer_fraction),
            ("multi_destination_fraction", self.multi_destination_fraction),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return fail(&format!("{name} must lie in [0, 1]"));
            }
        }
        if self.demands > 0 && self.visits < 2 {
            return fail("demands need at least two visits");
        }
        if self.empty_points > 2 * self.visits {
            return fail("more empty points than (visit, type) slots");
        }
        let inverted = self.sail_cost.0 > self.sail_cost.1
            || self.port_fee.0 > self.port_fee.1
            || self.move_cost.0 > self.move_cost.1
            || self.revenue.0 > self.revenue.1
            || self.amount.0 > self.amount.1
            || self.capacity_dc.0 > self.capacity_dc.1
            || self.reefer_share.0 > self.reefer_share.1;
        if inverted {
            return fail("a range is inverted");
        }
        if self.amount.0 == 0 {
            return fail("demand amounts must be positive");
        }
        if self.move_cost.0 < 0 {
            return fail("move costs must be non-negative");
        }
        if !(0.0..=1.0).contains(&self.reefer_share.0) || !(0.0..=1.0).contains(&self.reefer_share.1) {
            return fail("reefer_share must lie in [0, 1]");
        }
        Ok(())
    }
}

/// Builds a random instance whose graph is layered in visit order: ship
/// starts first, then the remaining visits, then the sink. Each ship has a
/// private backbone chain, so a node-disjoint routing always exists.
pub fn generate_random(p: &GeneratorParams) -> Result<Instance, GeneratorError> {
    p.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let n = p.visits;
    let sink = n;
    let ports = if p.ports == 0 { (n / 3).max(1) } else { p.ports };
    let port_move: Vec<i64> = (0..ports).map(|_| rng.random_range(p.move_cost.0..=p.move_cost.1)).collect();

    let mut visits = Vec::with_capacity(n);
    for k in 0..n {
        let port = rng.random_range(0..ports);
        let move_cost = if p.unequal_destination_costs {
            rng.random_range(p.move_cost.0..=p.move_cost.1)
        } else {
            port_move[port]
        };
        visits.push(Visit {
            id: format!("v{k}"),
            port: Some(format!("P{port}")),
            time_index: k as i64,
            port_fee: Cents(rng.random_range(p.port_fee.0..=p.port_fee.1)),
            port_fee_by_type: BTreeMap::new(),
            move_cost: Cents(move_cost),
        });
    }

    let type_b = p.ship_types == 2;
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    for s in 0..p.ships {
        let lane: Vec<usize> = (p.ships..n).filter(|k| (k - p.ships) % p.ships == s).collect();
        let mut prev = s;
        for &v in &lane {
            edges.insert((prev, v));
            prev = v;
        }
        edges.insert((prev, sink));
    }
    for i in 0..n {
        for j in (i + 1).max(p.ships)..n.min(i + p.window + 1) {
            if rng.random_bool(p.density) {
                edges.insert((i, j));
            }
        }
        if rng.random_bool(p.density / 2.0) {
            edges.insert((i, sink));
        }
    }
    let arcs: Vec<Arc> = edges
        .iter()
        .map(|&(from, to)| {
            let (sail, by_type) = if to == sink {
                (Cents::ZERO, BTreeMap::new())
            } else {
                let c = rng.random_range(p.sail_cost.0..=p.sail_cost.1);
                let mut by_type = BTreeMap::new();
                if type_b {
                    let factor = rng.random_range(0.8..1.4);
                    by_type.insert("B".to_string(), Cents((c as f64 * factor).round() as i64));
                }
                (Cents(c), by_type)
            };
            Arc {
                from,
                to,
                sail_cost: sail,
                sail_cost_by_type: by_type,
            }
        })
        .collect();

    let draw_caps = |rng: &mut ChaCha8Rng| {
        let dc = rng.random_range(p.capacity_dc.0..=p.capacity_dc.1);
        let share = rng.random_range(p.reefer_share.0..=p.reefer_share.1);
        (dc, ((dc as f64) * share).floor() as u32)
    };
    let caps_a = draw_caps(&mut rng);
    let caps_b = draw_caps(&mut rng);
    let ships: Vec<Ship> = (0..p.ships)
        .map(|s| {
            let b = type_b && s % 2 == 1;
            let (dc, rf) = if b { caps_b } else { caps_a };
            Ship {
                id: format!("s{s}"),
                start: s,
                capacity_dc: dc,
                capacity_rf: rf.min(dc),
                ship_type: if b { "B".into() } else { "A".into() },
            }
        })
        .collect();

    // Forward reachability; arcs only go forward in visit order.
    let mut reach = vec![BTreeSet::new(); n];
    for i in (0..n).rev() {
        let mut set = BTreeSet::new();
        for &(_, b) in edges.range((i, 0)..(i + 1, 0)) {
            if b < n {
                set.insert(b);
                set.extend(reach[b].iter().copied());
            }
        }
        reach[i] = set;
    }

    let origins: Vec<usize> = (0..n).filter(|&v| !reach[v].is_empty()).collect();
    let mut demands = Vec::with_capacity(p.demands);
    for m in 0..p.demands {
        let Some(&origin) = origins.choose(&mut rng) else {
            break;
        };
        let downstream: Vec<usize> = reach[origin].iter().copied().collect();
        let first = *downstream.choose(&mut rng).unwrap();
        let mut destinations = vec![first];
        if rng.random_bool(p.multi_destination_fraction) {
            let port = &visits[first].port;
            destinations = downstream
                .iter()
                .copied()
                .filter(|&v| visits[v].port == *port)
                .take(3)
                .collect();
            if !destinations.contains(&first) {
                destinations.push(first);
                destinations.sort_unstable();
            }
        }
        let cargo_type = if rng.random_bool(p.reefer_fraction) {
            CargoType::Rf
        } else {
            CargoType::Dc
        };
        demands.push(Demand {
            id: format!("m{m}"),
            origin,
            destinations,
            cargo_type,
            amount: rng.random_range(p.amount.0..=p.amount.1),
            revenue: Cents(rng.random_range(p.revenue.0..=p.revenue.1)),
        });
    }

    let mut slots: Vec<(usize, CargoType)> = (0..n).flat_map(|v| [(v, CargoType::Dc), (v, CargoType::Rf)]).collect();
    let mut empty_points = Vec::with_capacity(p.empty_points);
    for k in 0..p.empty_points {
        let idx = rng.random_range(0..slots.len());
        let (visit, cargo_type) = slots.swap_remove(idx);
        let amount = rng.random_range(p.amount.0..=p.amount.1) as i64;
        empty_points.push(EmptyPoint {
            visit,
            cargo_type,
            amount: if k % 2 == 0 { amount } else { -amount },
        });
    }
    empty_points.sort_by_key(|e| (e.visit, e.cargo_type));

    let inst = Instance {
        name: format!("gen-{}", p.seed),
        sink_id: "tau".into(),
        ships,
        visits,
        arcs,
        demands,
        empty_points,
        empty_revenue: [Cents(p.empty_revenue); 2],
    };
    debug_assert!(validate(&inst).is_ok(), "{}", validate(&inst));
    Ok(inst)
}
