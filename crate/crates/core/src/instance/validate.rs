use std::collections::{BTreeSet, HashSet};
use std::fmt;

use super::Instance;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IssueKind {
    DuplicateId,
    BadReference,
    SelfLoop,
    DuplicateArc,
    SinkOutArc,
    SinkArcCost,
    Cycle,
    StartOutDegree,
    StartHasIncoming,
    SharedStart,
    NotOnPath,
    CapacityOrdering,
    NegativeMoveCost,
    DemandAmount,
    DemandDestinations,
    EmptyPoint,
    NoSink,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Issue {
    pub kind: IssueKind,
    /// Field path of the offending item, e.g. `ships[1]`.
    pub location: String,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn has(&self, kind: IssueKind) -> bool {
        self.issues.iter().any(|i| i.kind == kind)
    }

    fn push(&mut self, kind: IssueKind, location: impl Into<String>, message: impl Into<String>) {
        self.issues.push(Issue {
            kind,
            location: location.into(),
            message: message.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, issue) in self.issues.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

/// Lists every violated invariant. An empty report means every solver accepts
/// the instance.
pub fn validate(inst: &Instance) -> ValidationReport {
    let mut r = ValidationReport::default();
    let n = inst.num_nodes();
    let sink = inst.sink();

    if inst.sink_id.is_empty() {
        r.push(IssueKind::NoSink, "sink", "sink id is empty");
    }
    let mut seen = HashSet::new();
    seen.insert(inst.sink_id.as_str());
    for (k, v) in inst.visits.iter().enumerate() {
        if !seen.insert(v.id.as_str()) {
            r.push(IssueKind::DuplicateId, format!("visits[{k}]"), format!("duplicate visit id {:?}", v.id));
        }
        if v.move_cost.0 < 0 {
            r.push(
                IssueKind::NegativeMoveCost,
                format!("visits[{k}].move_cost"),
                format!("move cost of {} is negative", v.id),
            );
        }
    }
    let mut ship_ids = HashSet::new();
    for (k, s) in inst.ships.iter().enumerate() {
        if !ship_ids.insert(s.id.as_str()) {
            r.push(IssueKind::DuplicateId, format!("ships[{k}]"), format!("duplicate ship id {:?}", s.id));
        }
        if s.capacity_rf > s.capacity_dc {
            r.push(
                IssueKind::CapacityOrdering,
                format!("ships[{k}]"),
                format!(
                    "ship {} has reefer capacity {} above total capacity {}",
                    s.id, s.capacity_rf, s.capacity_dc
                ),
            );
        }
        if s.start >= sink {
            r.push(IssueKind::BadReference, format!("ships[{k}].start"), "start must be a visit");
        }
    }
    let mut demand_ids = HashSet::new();
    for (k, d) in inst.demands.iter().enumerate() {
        if !demand_ids.insert(d.id.as_str()) {
            r.push(IssueKind::DuplicateId, format!("demands[{k}]"), format!("duplicate demand id {:?}", d.id));
        }
        if d.amount == 0 {
            r.push(IssueKind::DemandAmount, format!("demands[{k}].amount"), "amount must be positive");
        }
        if d.origin >= sink {
            r.push(IssueKind::BadReference, format!("demands[{k}].origin"), "origin must be a visit");
        }
        let dests: BTreeSet<usize> = d.destinations.iter().copied().collect();
        if d.destinations.is_empty() {
            r.push(IssueKind::DemandDestinations, format!("demands[{k}].destinations"), "no destinations");
        } else if dests.len() != d.destinations.len() {
            r.push(IssueKind::DemandDestinations, format!("demands[{k}].destinations"), "repeated destination");
        }
        if dests.contains(&d.origin) {
            r.push(
                IssueKind::DemandDestinations,
                format!("demands[{k}].destinations"),
                "origin is also a destination",
            );
        }
        if dests.iter().any(|&v| v >= sink) {
            r.push(IssueKind::BadReference, format!("demands[{k}].destinations"), "destinations must be visits");
        }
    }
    let mut points = HashSet::new();
    for (k, p) in inst.empty_points.iter().enumerate() {
        if p.amount == 0 {
            r.push(IssueKind::EmptyPoint, format!("empty_points[{k}].amount"), "amount must be non-zero");
        }
        if p.visit >= sink {
            r.push(IssueKind::BadReference, format!("empty_points[{k}].visit"), "must be a visit");
        }
        if !points.insert((p.visit, p.cargo_type)) {
            r.push(
                IssueKind::EmptyPoint,
                format!("empty_points[{k}]"),
                "more than one point for this visit and type",
            );
        }
    }

    let mut pairs = HashSet::new();
    let mut out_deg = vec![0usize; n];
    let mut in_deg = vec![0usize; n];
    let mut arcs_ok = true;
    for (k, a) in inst.arcs.iter().enumerate() {
        if a.from >= n || a.to >= n {
            r.push(IssueKind::BadReference, format!("arcs[{k}]"), "endpoint out of range");
            arcs_ok = false;
            continue;
        }
        let name = format!("{} -> {}", inst.node_id(a.from), inst.node_id(a.to));
        if a.from == a.to {
            r.push(IssueKind::SelfLoop, format!("arcs[{k}]"), format!("self loop {name}"));
        }
        if !pairs.insert((a.from, a.to)) {
            r.push(IssueKind::DuplicateArc, format!("arcs[{k}]"), format!("duplicate arc {name}"));
        }
        if a.from == sink {
            r.push(IssueKind::SinkOutArc, format!("arcs[{k}]"), format!("arc {name} leaves the sink"));
        }
        if a.to == sink && (a.sail_cost.0 != 0 || a.sail_cost_by_type.values().any(|c| c.0 != 0)) {
            r.push(IssueKind::SinkArcCost, format!("arcs[{k}]"), format!("sink arc {name} has a cost"));
        }
        out_deg[a.from] += 1;
        in_deg[a.to] += 1;
    }
    if !arcs_ok {
        return r;
    }

    let mut starts = HashSet::new();
    for (k, s) in inst.ships.iter().enumerate() {
        if s.start >= sink {
            continue;
        }
        if !starts.insert(s.start) {
            r.push(
                IssueKind::SharedStart,
                format!("ships[{k}].start"),
                format!("start visit {} is shared with another ship", inst.node_id(s.start)),
            );
        }
        if out_deg[s.start] == 0 {
            r.push(
                IssueKind::StartOutDegree,
                format!("ships[{k}].start"),
                format!("start visit {} has no outgoing arc", inst.node_id(s.start)),
            );
        }
        if in_deg[s.start] > 0 {
            r.push(
                IssueKind::StartHasIncoming,
                format!("ships[{k}].start"),
                format!("start visit {} has incoming arcs", inst.node_id(s.start)),
            );
        }
    }

    // Kahn's algorithm; whatever is left over lies on or behind a cycle.
    let out = inst.out_arcs();
    let mut deg = in_deg.clone();
    let mut stack: Vec<usize> = (0..n).filter(|&v| deg[v] == 0).collect();
    let mut removed = 0;
    while let Some(v) = stack.pop() {
        removed += 1;
        for &k in &out[v] {
            let w = inst.arcs[k].to;
            deg[w] -= 1;
            if deg[w] == 0 {
                stack.push(w);
            }
        }
    }
    if removed < n {
        let stuck: Vec<&str> = (0..n).filter(|&v| deg[v] > 0).map(|v| inst.node_id(v)).collect();
        r.push(
            IssueKind::Cycle,
            "arcs",
            format!("graph has a cycle through {}", stuck.join(", ")),
        );
    }

    let forward = sweep(n, &starts.iter().copied().collect::<Vec<_>>(), |v| {
        out[v].iter().map(|&k| inst.arcs[k].to).collect()
    });
    let inn = inst.in_arcs();
    let backward = sweep(n, &[sink], |v| inn[v].iter().map(|&k| inst.arcs[k].from).collect());
    for v in 0..sink {
        if !forward[v] || !backward[v] {
            r.push(
                IssueKind::NotOnPath,
                format!("visits[{v}]"),
                format!("visit {} is not on any path from a ship start to the sink", inst.node_id(v)),
            );
        }
    }
    r
}

fn sweep(n: usize, from: &[usize], next: impl Fn(usize) -> Vec<usize>) -> Vec<bool> {
    let mut seen = vec![false; n];
    let mut stack = from.to_vec();
    for &v in from {
        seen[v] = true;
    }
    while let Some(v) = stack.pop() {
        for w in next(v) {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen
}
