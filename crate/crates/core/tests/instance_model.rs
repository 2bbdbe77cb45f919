use std::collections::BTreeSet;

use proptest::prelude::*;
use serde_json::{json, Value};

use lsfrp::fixtures;
use lsfrp::instance::{path_count, validate, Instance, IssueKind, ReachError, ReachIndex};
use lsfrp::io::{generate_random, parse_instance, parse_instance_unchecked, GeneratorParams};
use lsfrp::oracle::ship_paths;

/// Instance JSON over visits `v0..` with the given ships, arcs and demands.
/// Every visit gets an arc to the sink.
fn doc(visits: usize, ships: Value, arcs: &[(&str, &str)], demands: Value) -> Value {
    let mut all_arcs: Vec<Value> = arcs.iter().map(|(a, b)| json!({"from": a, "to": b, "sail_cost": 100})).collect();
    for v in 0..visits {
        all_arcs.push(json!({"from": format!("v{v}"), "to": "tau", "sail_cost": 0}));
    }
    json!({
        "schema": "lsfrp-instance-v1",
        "name": "case",
        "sink": "tau",
        "ships": ships,
        "visits": (0..visits).map(|v| json!({"id": format!("v{v}"), "time_index": v, "port_fee": 0, "move_cost": 100})).collect::<Vec<_>>(),
        "arcs": all_arcs,
        "demands": demands,
        "empty_points": [],
        "empty_revenue": {"dc": 0, "rf": 0}
    })
}

fn ship(id: &str, start: &str) -> Value {
    json!({"id": id, "start": start, "capacity_dc": 100, "capacity_rf": 20})
}

fn demand(id: &str, origin: &str, dests: &[&str]) -> Value {
    json!({"id": id, "origin": origin, "destinations": dests, "cargo_type": "dc", "amount": 10, "revenue": 5000})
}

fn unchecked(v: &Value) -> Instance {
    parse_instance_unchecked(&v.to_string()).unwrap()
}

fn arc_pairs(inst: &Instance, set: &fixedbitset::FixedBitSet) -> BTreeSet<(String, String)> {
    set.ones()
        .map(|k| (inst.node_id(inst.arcs[k].from).to_string(), inst.node_id(inst.arcs[k].to).to_string()))
        .collect()
}

fn pairs(list: &[(&str, &str)]) -> BTreeSet<(String, String)> {
    list.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
}

#[test]
fn two_cycle_is_reported() {
    let v = doc(3, json!([ship("s1", "v0")]), &[("v0", "v1"), ("v1", "v2"), ("v2", "v1")], json!([]));
    let report = validate(&unchecked(&v));
    assert!(report.has(IssueKind::Cycle), "{report:?}");
    assert!(report.issues.iter().any(|i| i.message.contains("cycle")));
}

#[test]
fn reefer_capacity_above_total_is_reported() {
    let ships = json!([{"id": "s1", "start": "v0", "capacity_dc": 20, "capacity_rf": 30}]);
    let v = doc(2, ships, &[("v0", "v1")], json!([]));
    let report = validate(&unchecked(&v));
    assert!(report.has(IssueKind::CapacityOrdering));
    assert!(report.issues.iter().any(|i| i.location.contains("ships[0]")));
}

#[test]
fn fixtures_validate_cleanly() {
    for inst in [
        fixtures::t1(),
        fixtures::overload_1(),
        fixtures::reefer_pair(),
        fixtures::figure3(),
        fixtures::late_second_destination(),
        fixtures::strict_gap(),
        fixtures::fractional_master(),
        fixtures::empties(),
        fixtures::shared_corridor(),
        fixtures::pure_repositioning(),
    ] {
        let report = validate(&inst);
        assert!(report.is_ok(), "{}: {report:?}", inst.name);
    }
}

#[test]
fn demand_problems_are_reported() {
    let demands = json!([
        demand("m0", "v1", &[]),
        demand("m1", "v1", &["v1", "v2"]),
        {"id": "m2", "origin": "v0", "destinations": ["v2"], "cargo_type": "dc", "amount": 0, "revenue": 1},
    ]);
    let v = doc(3, json!([ship("s1", "v0")]), &[("v0", "v1"), ("v1", "v2")], demands);
    let report = validate(&unchecked(&v));
    assert!(report.has(IssueKind::DemandDestinations));
    assert!(report.has(IssueKind::DemandAmount));
    assert!(report.issues.iter().any(|i| i.location.contains("demands[0]")));
    assert!(report.issues.iter().any(|i| i.location.contains("demands[1]")));
}

#[test]
fn t1_reach_sets() {
    let inst = fixtures::t1();
    let reach = ReachIndex::new(&inst).unwrap();
    assert_eq!(arc_pairs(&inst, &reach.commodity_arcs[0]), pairs(&[("v1", "v2")]));
    assert_eq!(reach.movable_demands(0).unwrap(), vec![0]);
    assert_eq!(path_count(&inst, 0).unwrap(), 4);
}

#[test]
fn chain_arc_set_starts_at_the_origin() {
    let v = doc(4, json!([ship("s1", "v0")]), &[("v0", "v1"), ("v1", "v2"), ("v2", "v3")], json!([demand("m", "v1", &["v3"])]));
    let inst = parse_instance(&v.to_string()).unwrap();
    let reach = ReachIndex::new(&inst).unwrap();
    assert_eq!(arc_pairs(&inst, &reach.commodity_arcs[0]), pairs(&[("v1", "v2"), ("v2", "v3")]));
}

#[test]
fn unreachable_origin_is_not_movable() {
    // v1 is only reachable from s2's start.
    let ships = json!([ship("s1", "v0"), ship("s2", "v3")]);
    let v = doc(4, ships, &[("v0", "v2"), ("v3", "v1"), ("v1", "v2")], json!([demand("m", "v1", &["v2"])]));
    let inst = parse_instance(&v.to_string()).unwrap();
    let reach = ReachIndex::new(&inst).unwrap();
    assert!(reach.movable_demands(0).unwrap().is_empty());
    assert_eq!(reach.movable_demands(1).unwrap(), vec![0]);
    assert!(matches!(reach.movable_demands(7), Err(ReachError::UnknownShip(7))));
}

#[test]
fn diamond_and_single_arc_path_counts() {
    let v = doc(4, json!([ship("s1", "v0")]), &[("v0", "v1"), ("v0", "v2"), ("v1", "v3"), ("v2", "v3")], json!([]));
    let mut value = v.clone();
    // Only c (v3) reaches the sink.
    value["arcs"] = json!(value["arcs"].as_array().unwrap().iter().filter(|a| a["to"] != "tau" || a["from"] == "v3").cloned().collect::<Vec<_>>());
    let inst = parse_instance(&value.to_string()).unwrap();
    assert_eq!(path_count(&inst, 0).unwrap(), 2);

    let single = json!({
        "schema": "lsfrp-instance-v1", "name": "single", "sink": "tau",
        "ships": [ship("s1", "v0")],
        "visits": [{"id": "v0", "time_index": 0, "port_fee": 0, "move_cost": 0}],
        "arcs": [{"from": "v0", "to": "tau", "sail_cost": 0}],
        "demands": [], "empty_points": [], "empty_revenue": {"dc": 0, "rf": 0}
    });
    assert_eq!(path_count(&parse_instance(&single.to_string()).unwrap(), 0).unwrap(), 1);
}

#[test]
fn unvalidated_instance_is_refused() {
    let v = doc(3, json!([ship("s1", "v0")]), &[("v0", "v1"), ("v1", "v2"), ("v2", "v1")], json!([]));
    assert!(matches!(ReachIndex::new(&unchecked(&v)), Err(ReachError::Invalid(_))));
}

fn small_params() -> impl Strategy<Value = GeneratorParams> {
    (1usize..=3, 1usize..=2, 6usize..=14, 0usize..=10, 0.15f64..0.8, 0usize..=4, any::<u64>()).prop_map(
        |(ships, ship_types, visits, demands, density, empty_points, seed)| GeneratorParams {
            ships,
            ship_types,
            visits,
            demands,
            density,
            empty_points,
            seed,
            ..GeneratorParams::default()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_instances_validate(p in small_params()) {
        let inst = generate_random(&p).unwrap();
        let report = validate(&inst);
        prop_assert!(report.is_ok(), "{:?}", report);
    }

    #[test]
    fn topological_order_is_consistent(p in small_params()) {
        let inst = generate_random(&p).unwrap();
        let reach = ReachIndex::new(&inst).unwrap();
        for a in &inst.arcs {
            prop_assert!(reach.rank[a.from] < reach.rank[a.to]);
        }
    }

    #[test]
    fn path_count_matches_enumeration(p in small_params()) {
        let inst = generate_random(&p).unwrap();
        for s in 0..inst.ships.len() {
            if let Some(paths) = ship_paths(&inst, s, 10_000) {
                prop_assert_eq!(path_count(&inst, s).unwrap(), paths.len() as u64);
            }
        }
    }

    #[test]
    fn removing_an_arc_never_grows_reach(p in small_params(), pick in any::<prop::sample::Index>()) {
        let inst = generate_random(&p).unwrap();
        let sink = inst.sink();
        let candidates: Vec<usize> = (0..inst.arcs.len()).filter(|&k| inst.arcs[k].to != sink).collect();
        prop_assume!(!candidates.is_empty());
        let removed = candidates[pick.index(candidates.len())];
        let mut smaller = inst.clone();
        smaller.arcs.remove(removed);
        prop_assume!(validate(&smaller).is_ok());
        let before = ReachIndex::new(&inst).unwrap();
        let after = ReachIndex::new(&smaller).unwrap();
        for c in 0..inst.demands.len() {
            let a = arc_pairs(&inst, &before.commodity_arcs[c]);
            let b = arc_pairs(&smaller, &after.commodity_arcs[c]);
            prop_assert!(b.is_subset(&a));
        }
        for s in 0..inst.ships.len() {
            let a: BTreeSet<usize> = before.movable_demands(s).unwrap().into_iter().collect();
            let b: BTreeSet<usize> = after.movable_demands(s).unwrap().into_iter().collect();
            prop_assert!(b.is_subset(&a));
        }
    }
}
