//! Small hand-built instances used by tests, examples and the CLI docs.
//!
//! Money arguments of the builder are in whole currency units.

use std::collections::BTreeMap;

use crate::instance::{Arc, CargoType, Cents, Demand, EmptyPoint, Instance, Ship, Visit};

/// Terse construction of instances by visit name.
#[derive(Clone, Debug)]
pub struct Builder {
    inst: Instance,
    pending_arcs: Vec<(String, String, i64)>,
}

impl Builder {
    pub fn new(name: &str) -> Self {
        Builder {
            inst: Instance {
                name: name.into(),
                sink_id: "tau".into(),
                ..Instance::default()
            },
            pending_arcs: Vec::new(),
        }
    }

    pub fn visit(mut self, id: &str, fee: i64, move_cost: i64) -> Self {
        let k = self.inst.visits.len() as i64;
        self.inst.visits.push(Visit {
            id: id.into(),
            port: None,
            time_index: k,
            port_fee: Cents(fee * 100),
            port_fee_by_type: BTreeMap::new(),
            move_cost: Cents(move_cost * 100),
        });
        self
    }

    /// Arc by visit names; `"tau"` is the sink.
    pub fn arc(mut self, from: &str, to: &str, sail: i64) -> Self {
        self.pending_arcs.push((from.into(), to.into(), sail));
        self
    }

    pub fn ship(mut self, id: &str, start: &str, dc: u32, rf: u32, ship_type: &str) -> Self {
        let start = self.node(start);
        self.inst.ships.push(Ship {
            id: id.into(),
            start,
            capacity_dc: dc,
            capacity_rf: rf,
            ship_type: ship_type.into(),
        });
        self
    }

    pub fn demand(mut self, id: &str, origin: &str, dests: &[&str], q: CargoType, amount: u32, revenue: i64) -> Self {
        let origin = self.node(origin);
        let destinations = dests.iter().map(|d| self.node(d)).collect();
        self.inst.demands.push(Demand {
            id: id.into(),
            origin,
            destinations,
            cargo_type: q,
            amount,
            revenue: Cents(revenue * 100),
        });
        self
    }

    pub fn empty_point(mut self, visit: &str, q: CargoType, amount: i64) -> Self {
        let visit = self.node(visit);
        self.inst.empty_points.push(EmptyPoint {
            visit,
            cargo_type: q,
            amount,
        });
        self
    }

    pub fn empty_revenue(mut self, revenue: i64) -> Self {
        self.inst.empty_revenue = [Cents(revenue * 100); 2];
        self
    }

    fn node(&self, id: &str) -> usize {
        if id == self.inst.sink_id {
            return usize::MAX;
        }
        self.inst
            .visits
            .iter()
            .position(|v| v.id == id)
            .unwrap_or_else(|| panic!("unknown visit {id}"))
    }

    pub fn build(mut self) -> Instance {
        let sink = self.inst.visits.len();
        let fix = |v: usize| if v == usize::MAX { sink } else { v };
        for s in &mut self.inst.ships {
            s.start = fix(s.start);
        }
        for d in &mut self.inst.demands {
            d.origin = fix(d.origin);
            for v in &mut d.destinations {
                *v = fix(*v);
            }
        }
        for (from, to, sail) in std::mem::take(&mut self.pending_arcs) {
            let from = fix(self.node(&from));
            let to = fix(self.node(&to));
            self.inst.arcs.push(Arc {
                from,
                to,
                sail_cost: Cents(sail * 100),
                sail_cost_by_type: BTreeMap::new(),
            });
        }
        self.inst
    }
}

/// One ship, three visits, one demand. Optimum 676 on v0 v1 v2.
pub fn t1() -> Instance {
    Builder::new("t1")
        .visit("v0", 0, 0)
        .visit("v1", 2, 3)
        .visit("v2", 2, 3)
        .ship("s1", "v0", 100, 20, "default")
        .arc("v0", "v1", 10)
        .arc("v1", "v2", 10)
        .arc("v0", "v2", 15)
        .arc("v1", "tau", 0)
        .arc("v2", "tau", 0)
        .arc("v0", "tau", 0)
        .demand("m1", "v1", &["v2"], CargoType::Dc, 50, 20)
        .build()
}

/// A ship of 50 TEU carries 40 of A past the origin of B, which offers 30.
/// Optimum 1270: all of B and 20 of A.
pub fn overload_1() -> Instance {
    Builder::new("overload-1")
        .visit("v0", 0, 0)
        .visit("oA", 0, 0)
        .visit("oB", 0, 0)
        .visit("d", 0, 0)
        .ship("s1", "v0", 50, 10, "default")
        .arc("v0", "oA", 10)
        .arc("oA", "oB", 10)
        .arc("oB", "d", 10)
        .arc("d", "tau", 0)
        .arc("v0", "tau", 0)
        .demand("A", "oA", &["d"], CargoType::Dc, 40, 20)
        .demand("B", "oB", &["d"], CargoType::Dc, 30, 30)
        .build()
}

/// Two reefer demands of 4 loaded back to back on a ship with 5 plugs.
/// Optimum 910: 4 of R2 and 1 of R1.
pub fn reefer_pair() -> Instance {
    Builder::new("reefer-pair")
        .visit("v0", 0, 0)
        .visit("r1", 0, 0)
        .visit("r2", 0, 0)
        .visit("d", 0, 0)
        .ship("s1", "v0", 100, 5, "default")
        .arc("v0", "r1", 10)
        .arc("r1", "r2", 10)
        .arc("r2", "d", 10)
        .arc("d", "tau", 0)
        .arc("v0", "tau", 0)
        .demand("R1", "r1", &["d"], CargoType::Rf, 4, 100)
        .demand("R2", "r2", &["d"], CargoType::Rf, 4, 210)
        .build()
}

/// Demand A may unload at dA1 before origin B or ride on to dA2 past it; a
/// bypass oA -> oB skips dA1. Optimum 960 unloads A at dA1.
pub fn figure3() -> Instance {
    Builder::new("figure-3")
        .visit("v0", 0, 0)
        .visit("oA", 0, 0)
        .visit("dA1", 0, 0)
        .visit("oB", 0, 0)
        .visit("dA2", 0, 0)
        .visit("dB", 0, 0)
        .ship("s1", "v0", 50, 10, "default")
        .arc("v0", "oA", 0)
        .arc("oA", "dA1", 10)
        .arc("dA1", "oB", 10)
        .arc("oA", "oB", 5)
        .arc("oB", "dA2", 10)
        .arc("dA2", "dB", 10)
        .arc("dB", "tau", 0)
        .arc("v0", "tau", 0)
        .demand("A", "oA", &["dA1", "dA2"], CargoType::Dc, 50, 10)
        .demand("B", "oB", &["dB"], CargoType::Dc, 50, 10)
        .build()
}

/// Like [`figure3`], but the later destination of A lies beyond B's
/// destination, so B has no destination downstream of dA2. Optimum 970.
pub fn late_second_destination() -> Instance {
    Builder::new("late-second-destination")
        .visit("v0", 0, 0)
        .visit("oA", 0, 0)
        .visit("dA1", 0, 0)
        .visit("oB", 0, 0)
        .visit("i", 0, 0)
        .visit("dB", 0, 0)
        .visit("dA2", 0, 0)
        .ship("s1", "v0", 50, 10, "default")
        .arc("v0", "oA", 0)
        .arc("oA", "dA1", 10)
        .arc("dA1", "oB", 10)
        .arc("oA", "oB", 5)
        .arc("oB", "i", 5)
        .arc("i", "dB", 5)
        .arc("dB", "dA2", 5)
        .arc("dB", "tau", 0)
        .arc("dA2", "tau", 0)
        .arc("v0", "tau", 0)
        .demand("A", "oA", &["dA1", "dA2"], CargoType::Dc, 50, 10)
        .demand("B", "oB", &["dB"], CargoType::Dc, 50, 10)
        .build()
}

/// Two ships of different types can meet at c. Only type B sails c -> d
/// cheaply, but the cargo starts on ship s1 of type A. The reduced
/// relaxation passes the cargo from half of s1 to half of s2 at c; the
/// per-ship models cannot. Optimum 0: both ships go home empty.
pub fn strict_gap() -> Instance {
    let mut inst = Builder::new("strict-gap")
        .visit("a", 0, 0)
        .visit("b", 0, 0)
        .visit("c", 0, 0)
        .visit("d", 0, 0)
        .ship("s1", "a", 100, 0, "A")
        .ship("s2", "b", 100, 0, "B")
        .arc("a", "c", 10)
        .arc("b", "c", 10)
        .arc("c", "d", 0)
        .arc("a", "tau", 0)
        .arc("b", "tau", 0)
        .arc("c", "tau", 0)
        .arc("d", "tau", 0)
        .demand("m1", "a", &["d"], CargoType::Dc, 100, 10)
        .build();
    inst.arcs[2].sail_cost_by_type.insert("A".into(), Cents(200_000));
    inst
}

/// Two identical ships on a small lattice. Ship s1 can pick up 50 TEU at its
/// own start, but the only route that delivers them blocks every route of
/// s0. Optimum -20; the relaxed path master mixes half routes to reach 220.
pub fn fractional_master() -> Instance {
    Builder::new("fractional-master")
        .visit("v0", 0, 0)
        .visit("v1", 0, 0)
        .visit("v2", 0, 0)
        .visit("v3", 0, 0)
        .visit("v4", 0, 0)
        .ship("s0", "v0", 60, 0, "A")
        .ship("s1", "v1", 60, 0, "A")
        .arc("v0", "v2", 10)
        .arc("v0", "v4", 10)
        .arc("v1", "v2", 10)
        .arc("v1", "v3", 10)
        .arc("v2", "v3", 10)
        .arc("v2", "v4", 10)
        .arc("v3", "tau", 0)
        .arc("v4", "tau", 0)
        .demand("m0", "v1", &["v4"], CargoType::Dc, 50, 10)
        .build()
}

/// A laden demand and an empty-equipment opportunity on one route. Moving an
/// empty costs 200 in handling, so it pays only when the revenue exceeds that.
pub fn empties() -> Instance {
    Builder::new("empties")
        .visit("v0", 0, 0)
        .visit("p", 10, 100)
        .visit("q", 10, 100)
        .visit("r", 10, 50)
        .ship("s1", "v0", 60, 10, "default")
        .arc("v0", "p", 100)
        .arc("p", "q", 100)
        .arc("q", "r", 100)
        .arc("p", "r", 150)
        .arc("r", "tau", 0)
        .arc("v0", "tau", 0)
        .demand("m1", "p", &["r"], CargoType::Dc, 40, 400)
        .empty_point("p", CargoType::Dc, 30)
        .empty_point("q", CargoType::Dc, -25)
        .empty_point("p", CargoType::Rf, 10)
        .empty_point("r", CargoType::Rf, -10)
        .build()
}

/// Two identical ships whose direct routes share visit c; ship b also has
/// a private way to the sink.
pub fn shared_corridor() -> Instance {
    Builder::new("shared-corridor")
        .visit("a", 0, 0)
        .visit("b", 0, 0)
        .visit("c", 5, 1)
        .ship("sa", "a", 50, 10, "default")
        .ship("sb", "b", 50, 10, "default")
        .arc("a", "c", 10)
        .arc("b", "c", 10)
        .arc("b", "tau", 0)
        .arc("c", "tau", 0)
        .demand("m1", "a", &["c"], CargoType::Dc, 30, 20)
        .demand("m2", "b", &["c"], CargoType::Dc, 30, 20)
        .build()
}

/// No demands at all: the optimum is the cheapest disjoint routing.
pub fn pure_repositioning() -> Instance {
    Builder::new("pure-repositioning")
        .visit("a", 0, 0)
        .visit("b", 0, 0)
        .visit("c", 7, 0)
        .visit("d", 3, 0)
        .ship("sa", "a", 50, 10, "default")
        .ship("sb", "b", 50, 10, "default")
        .arc("a", "c", 10)
        .arc("a", "d", 20)
        .arc("b", "c", 12)
        .arc("b", "d", 30)
        .arc("c", "tau", 0)
        .arc("d", "tau", 0)
        .build()
}
