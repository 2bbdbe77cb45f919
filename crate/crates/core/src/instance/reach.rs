use std::collections::BTreeSet;

use fixedbitset::FixedBitSet;

use super::{validate, CargoType, Instance, Ship, ValidationReport};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReachError {
    #[error("instance is not valid:\n{0}")]
    Invalid(ValidationReport),
    #[error("unknown ship index {0}")]
    UnknownShip(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CommodityKind {
    Demand(usize),
    Empty(usize),
}

/// A surplus/deficit pair of empty equipment with the deficit downstream of
/// the surplus.
#[derive(Clone, Debug, PartialEq)]
pub struct EmptyPair {
    /// Index into `Instance::empty_points`.
    pub surplus: usize,
    pub deficit: usize,
    pub cargo_type: CargoType,
    pub from: usize,
    pub to: usize,
}

/// Anything a ship can load at one visit and unload at a later one: a demand
/// triplet or an empty pair.
#[derive(Clone, Debug, PartialEq)]
pub struct Commodity {
    pub kind: CommodityKind,
    pub origin: usize,
    pub destinations: Vec<usize>,
    pub cargo_type: CargoType,
    /// Laden reefers need a plug; empty reefers do not.
    pub uses_plugs: bool,
    /// TEU available: the demand amount, or min(surplus, deficit) for a pair.
    pub amount: f64,
    /// Revenue per TEU, in money.
    pub revenue: f64,
}

impl Commodity {
    /// Revenue minus the move costs at both ends, per TEU.
    pub fn unit_profit(&self, inst: &Instance, dest: usize) -> f64 {
        self.revenue - inst.move_cost(self.origin).money() - inst.move_cost(dest).money()
    }

    /// Most that one ship can carry.
    pub fn ship_bound(&self, ship: &Ship) -> f64 {
        let cap = if self.uses_plugs { ship.capacity_rf } else { ship.capacity_dc };
        self.amount.min(cap as f64)
    }

    pub fn is_empty(&self) -> bool {
        matches!(self.kind, CommodityKind::Empty(_))
    }

    pub fn label(&self, inst: &Instance) -> String {
        match self.kind {
            CommodityKind::Demand(m) => inst.demands[m].id.clone(),
            CommodityKind::Empty(_) => format!(
                "empty_{}_{}_{}",
                self.cargo_type,
                inst.node_id(self.origin),
                inst.node_id(self.destinations[0])
            ),
        }
    }
}

/// Reachability and per-commodity arc sets of a validated instance.
#[derive(Clone, Debug)]
pub struct ReachIndex {
    pub topo: Vec<usize>,
    /// Position of each node in `topo`.
    pub rank: Vec<usize>,
    pub out_arcs: Vec<Vec<usize>>,
    pub in_arcs: Vec<Vec<usize>>,
    /// Nodes reachable from each node, itself included.
    pub descendants: Vec<FixedBitSet>,
    pub empty_pairs: Vec<EmptyPair>,
    /// Demands in input order, then empty pairs.
    pub commodities: Vec<Commodity>,
    /// Arcs (sink arcs excluded) each commodity can travel on.
    pub commodity_arcs: Vec<FixedBitSet>,
    /// Commodities each ship can deliver.
    pub movable: Vec<Vec<usize>>,
    /// Commodities by empty-point index, for surplus and deficit caps.
    pub surplus_groups: Vec<(usize, Vec<usize>)>,
    pub deficit_groups: Vec<(usize, Vec<usize>)>,
    pub path_counts: Vec<u64>,
}

impl ReachIndex {
    pub fn new(inst: &Instance) -> Result<Self, ReachError> {
        let report = validate(inst);
        if !report.is_ok() {
            return Err(ReachError::Invalid(report));
        }
        let n = inst.num_nodes();
        let out_arcs = inst.out_arcs();
        let in_arcs = inst.in_arcs();
        let topo = topological_order(inst, &out_arcs, &in_arcs);
        let mut rank = vec![0; n];
        for (k, &v) in topo.iter().enumerate() {
            rank[v] = k;
        }
        let mut descendants = vec![FixedBitSet::with_capacity(n); n];
        for &v in topo.iter().rev() {
            let mut set = FixedBitSet::with_capacity(n);
            set.insert(v);
            for &k in &out_arcs[v] {
                set.union_with(&descendants[inst.arcs[k].to]);
            }
            descendants[v] = set;
        }

        let mut empty_pairs = Vec::new();
        for (si, s) in inst.empty_points.iter().enumerate().filter(|(_, p)| p.amount > 0) {
            for (di, d) in inst.empty_points.iter().enumerate().filter(|(_, p)| p.amount < 0) {
                if s.cargo_type == d.cargo_type && s.visit != d.visit && descendants[s.visit][d.visit] {
                    empty_pairs.push(EmptyPair {
                        surplus: si,
                        deficit: di,
                        cargo_type: s.cargo_type,
                        from: s.visit,
                        to: d.visit,
                    });
                }
            }
        }

        let mut commodities: Vec<Commodity> = inst
            .demands
            .iter()
            .enumerate()
            .map(|(m, d)| Commodity {
                kind: CommodityKind::Demand(m),
                origin: d.origin,
                destinations: d.destinations.iter().copied().collect::<BTreeSet<_>>().into_iter().collect(),
                cargo_type: d.cargo_type,
                uses_plugs: d.cargo_type == CargoType::Rf,
                amount: d.amount as f64,
                revenue: d.revenue.money(),
            })
            .collect();
        for (k, p) in empty_pairs.iter().enumerate() {
            let surplus = inst.empty_points[p.surplus].amount;
            let deficit = -inst.empty_points[p.deficit].amount;
            commodities.push(Commodity {
                kind: CommodityKind::Empty(k),
                origin: p.from,
                destinations: vec![p.to],
                cargo_type: p.cargo_type,
                uses_plugs: false,
                amount: surplus.min(deficit) as f64,
                revenue: inst.empty_revenue[p.cargo_type.index()].money(),
            });
        }

        let mut index = ReachIndex {
            topo,
            rank,
            out_arcs,
            in_arcs,
            descendants,
            empty_pairs,
            commodity_arcs: Vec::new(),
            movable: Vec::new(),
            surplus_groups: Vec::new(),
            deficit_groups: Vec::new(),
            path_counts: Vec::new(),
            commodities,
        };
        index.commodity_arcs = index
            .commodities
            .iter()
            .map(|c| index.arcs_between(inst, c.origin, &c.destinations))
            .collect();
        index.movable = inst
            .ships
            .iter()
            .map(|s| {
                (0..index.commodities.len())
                    .filter(|&c| {
                        index.descendants[s.start][index.commodities[c].origin]
                            && !index.commodity_arcs[c].is_clear()
                    })
                    .collect()
            })
            .collect();
        for (pi, p) in inst.empty_points.iter().enumerate() {
            let members: Vec<usize> = index
                .commodities
                .iter()
                .enumerate()
                .filter_map(|(c, com)| match com.kind {
                    CommodityKind::Empty(k) => {
                        let pair = &index.empty_pairs[k];
                        (pair.surplus == pi || pair.deficit == pi).then_some(c)
                    }
                    _ => None,
                })
                .collect();
            if members.is_empty() {
                continue;
            }
            if p.amount > 0 {
                index.surplus_groups.push((pi, members));
            } else {
                index.deficit_groups.push((pi, members));
            }
        }
        index.path_counts = (0..inst.ships.len()).map(|s| index.count_paths(inst, s)).collect();
        Ok(index)
    }

    /// Arcs of A' on some path from `origin` to one of `dests`.
    pub fn arcs_between(&self, inst: &Instance, origin: usize, dests: &[usize]) -> FixedBitSet {
        let mut set = FixedBitSet::with_capacity(inst.arcs.len());
        let sink = inst.sink();
        for (k, a) in inst.arcs.iter().enumerate() {
            if a.to == sink || !self.descendants[origin][a.from] {
                continue;
            }
            if dests.iter().any(|&d| d != origin && self.descendants[a.to][d]) {
                set.insert(k);
            }
        }
        set
    }

    /// Whether `node` has an arc out of it in `arcs`.
    pub fn passes(&self, arcs: &FixedBitSet, node: usize) -> bool {
        self.out_arcs[node].iter().any(|&k| arcs[k])
    }

    pub fn reachable(&self, from: usize, to: usize) -> bool {
        self.descendants[from][to]
    }

    /// Nodes ship `s` can visit: everything downstream of its start.
    pub fn ship_nodes(&self, ship: &Ship) -> &FixedBitSet {
        &self.descendants[ship.start]
    }

    /// Arcs ship `s` can sail, sink arcs included.
    pub fn ship_arcs(&self, inst: &Instance, ship: usize) -> Vec<usize> {
        let nodes = self.ship_nodes(&inst.ships[ship]);
        (0..inst.arcs.len()).filter(|&k| nodes[inst.arcs[k].from]).collect()
    }

    /// Demands (not empty pairs) ship `s` can deliver.
    pub fn movable_demands(&self, ship: usize) -> Result<Vec<usize>, ReachError> {
        let list = self.movable.get(ship).ok_or(ReachError::UnknownShip(ship))?;
        Ok(list
            .iter()
            .filter_map(|&c| match self.commodities[c].kind {
                CommodityKind::Demand(m) => Some(m),
                CommodityKind::Empty(_) => None,
            })
            .collect())
    }

    /// Origins of movable commodities of type `q` (laden or empty).
    pub fn origin_visits(&self, ship: usize, q: CargoType) -> BTreeSet<usize> {
        self.movable[ship]
            .iter()
            .map(|&c| &self.commodities[c])
            .filter(|c| c.cargo_type == q)
            .map(|c| c.origin)
            .collect()
    }

    fn count_paths(&self, inst: &Instance, ship: usize) -> u64 {
        let mut count = vec![0u64; inst.num_nodes()];
        count[inst.sink()] = 1;
        for &v in self.topo.iter().rev() {
            if v == inst.sink() {
                continue;
            }
            count[v] = self.out_arcs[v]
                .iter()
                .fold(0u64, |acc, &k| acc.saturating_add(count[inst.arcs[k].to]));
        }
        count[inst.ships[ship].start]
    }
}

fn topological_order(inst: &Instance, out_arcs: &[Vec<usize>], in_arcs: &[Vec<usize>]) -> Vec<usize> {
    let n = inst.num_nodes();
    let mut deg: Vec<usize> = in_arcs.iter().map(Vec::len).collect();
    let mut ready: BTreeSet<usize> = (0..n).filter(|&v| deg[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = ready.pop_first() {
        order.push(v);
        for &k in &out_arcs[v] {
            let w = inst.arcs[k].to;
            deg[w] -= 1;
            if deg[w] == 0 {
                ready.insert(w);
            }
        }
    }
    order
}

/// Number of start-to-sink paths of `ship`, saturating at `u64::MAX`.
pub fn path_count(inst: &Instance, ship: usize) -> Result<u64, ReachError> {
    if ship >= inst.ships.len() {
        return Err(ReachError::UnknownShip(ship));
    }
    Ok(ReachIndex::new(inst)?.path_counts[ship])
}
