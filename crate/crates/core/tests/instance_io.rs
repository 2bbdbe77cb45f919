use std::collections::BTreeMap;

use proptest::prelude::*;
use serde_json::{json, Value};

use lsfrp::fixtures::{self, Builder};
use lsfrp::io::{generate_random, parse_instance, parse_solution, write_instance, write_solution, GeneratorError, GeneratorParams, IoError};
use lsfrp::solution::Method;
use lsfrp::{solve, SolveOptions};

fn t1_json() -> Value {
    serde_json::from_str(&write_instance(&fixtures::t1())).unwrap()
}

#[test]
fn t1_file_matches_fixture() {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/t1.json")).unwrap();
    assert_eq!(parse_instance(&text).unwrap(), fixtures::t1());
}

#[test]
fn undefined_visit_is_named() {
    let mut v = t1_json();
    v["arcs"][1]["to"] = json!("v9");
    let err = parse_instance(&v.to_string()).unwrap_err();
    assert!(matches!(&err, IoError::Reference { id, .. } if id == "v9"), "{err}");
    assert!(err.to_string().contains("v9"));
    assert!(err.to_string().contains("arcs[1]"));
}

#[test]
fn undefined_ship_start_is_named() {
    let mut v = t1_json();
    v["ships"][0]["start"] = json!("nowhere");
    let err = parse_instance(&v.to_string()).unwrap_err();
    assert!(err.to_string().contains("nowhere"));
}

#[test]
fn unknown_fields_and_schema_are_rejected() {
    let mut v = t1_json();
    v["ships"][0]["speed"] = json!(12);
    assert!(matches!(parse_instance(&v.to_string()), Err(IoError::Json(_))));

    let mut v = t1_json();
    v["schema"] = json!("lsfrp-instance-v0");
    assert!(matches!(parse_instance(&v.to_string()), Err(IoError::Schema { .. })));

    assert!(matches!(parse_instance("{\"schema\": "), Err(IoError::Json(_))));
}

#[test]
fn validation_failures_surface_as_parse_errors() {
    let mut v = t1_json();
    v["ships"][0]["capacity_rf"] = json!(500);
    let err = parse_instance(&v.to_string()).unwrap_err();
    assert!(matches!(err, IoError::Invalid(_)));
    assert!(err.to_string().contains("ships[0]"));
}

#[test]
fn empty_demand_list_is_valid() {
    let mut v = t1_json();
    v["demands"] = json!([]);
    let inst = parse_instance(&v.to_string()).unwrap();
    assert!(inst.demands.is_empty());
}

#[test]
fn same_seed_gives_identical_text() {
    let p = GeneratorParams { seed: 1, ..GeneratorParams::default() };
    assert_eq!(write_instance(&generate_random(&p).unwrap()), write_instance(&generate_random(&p).unwrap()));
    let q = GeneratorParams { seed: 2, ..p.clone() };
    assert_ne!(write_instance(&generate_random(&p).unwrap()), write_instance(&generate_random(&q).unwrap()));
}

#[test]
fn infeasible_params_are_refused() {
    let bad = [
        GeneratorParams { visits: 0, demands: 3, ..GeneratorParams::default() },
        GeneratorParams { ships: 0, ..GeneratorParams::default() },
        GeneratorParams { density: 0.0, ..GeneratorParams::default() },
        GeneratorParams { ship_types: 3, ..GeneratorParams::default() },
        GeneratorParams { revenue: (500, 100), ..GeneratorParams::default() },
    ];
    for p in bad {
        assert!(matches!(generate_random(&p), Err(GeneratorError::Params(_))), "{p:?}");
    }
}

#[test]
fn oracle_handles_the_mid_sized_family() {
    let p = GeneratorParams { ships: 3, visits: 14, demands: 12, seed: 3, ..GeneratorParams::default() };
    let inst = generate_random(&p).unwrap();
    let start = std::time::Instant::now();
    let sol = solve(&inst, Method::Oracle, &SolveOptions::default()).unwrap();
    assert_eq!(sol.status.as_str(), "optimal");
    assert!(start.elapsed().as_secs_f64() < 10.0);
}

#[test]
fn t1_solution_file_has_objective_676() {
    let inst = fixtures::t1();
    let sol = solve(&inst, Method::Oracle, &SolveOptions::default()).unwrap();
    let text = write_solution(&inst, &sol, &BTreeMap::new());
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["schema"], "lsfrp-solution-v1");
    assert_eq!(v["objective"].as_f64().unwrap(), 676.0);
    assert_eq!(v["ships"][0]["path"], json!(["v0", "v1", "v2", "tau"]));
}

#[test]
fn empty_instance_solution() {
    let inst = Builder::new("idle").visit("v0", 0, 0).ship("s1", "v0", 10, 0, "a").arc("v0", "tau", 0).build();
    let sol = solve(&inst, Method::Revised, &SolveOptions::default()).unwrap();
    let v: Value = serde_json::from_str(&write_solution(&inst, &sol, &BTreeMap::new())).unwrap();
    assert_eq!(v["objective"].as_f64().unwrap(), 0.0);
    assert!(v["demand_flows"].as_array().unwrap().is_empty());
}

#[test]
fn lazy_run_reports_its_cuts() {
    let p = GeneratorParams { ships: 3, visits: 12, demands: 10, seed: 11, ..GeneratorParams::default() };
    let inst = generate_random(&p).unwrap();
    let sol = solve(&inst, Method::ColgenLazy, &SolveOptions::default()).unwrap();
    let v: Value = serde_json::from_str(&write_solution(&inst, &sol, &BTreeMap::new())).unwrap();
    let d = &sol.diagnostics;
    let per_ship: usize = d.ships.iter().map(|s| s.gamma_dc + s.gamma_rf).sum();
    assert_eq!(d.cuts_dc + d.cuts_rf, per_ship);
    assert_eq!(v["diagnostics"]["cuts_dc"].as_u64().unwrap() as usize, d.cuts_dc);
    assert_eq!(v["diagnostics"]["cuts_rf"].as_u64().unwrap() as usize, d.cuts_rf);
}

fn params() -> impl Strategy<Value = GeneratorParams> {
    (1usize..=3, 1usize..=2, 4usize..=14, 0usize..=12, 0.1f64..=1.0, 0.0f64..=1.0, 0usize..=5, any::<bool>(), any::<u64>()).prop_map(
        |(ships, ship_types, visits, demands, density, reefer_fraction, empty_points, unequal, seed)| GeneratorParams {
            ships,
            ship_types,
            visits,
            demands,
            density,
            reefer_fraction,
            empty_points,
            unequal_destination_costs: unequal,
            seed,
            ..GeneratorParams::default()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn parse_inverts_write(p in params()) {
        let inst = generate_random(&p).unwrap();
        let text = write_instance(&inst);
        let back = parse_instance(&text).unwrap();
        prop_assert_eq!(&back, &inst);
        prop_assert_eq!(write_instance(&back), text);
    }

    #[test]
    fn solution_files_parse_back(p in params()) {
        let inst = generate_random(&GeneratorParams { visits: p.visits.min(10), demands: p.demands.min(8), ..p }).unwrap();
        let sol = solve(&inst, Method::ColgenLazy, &SolveOptions::default()).unwrap();
        let meta: BTreeMap<String, String> = [("seed".to_string(), "4".to_string())].into();
        let text = write_solution(&inst, &sol, &meta);
        let (back, back_meta) = parse_solution(&inst, &text).unwrap();
        prop_assert_eq!(back_meta, meta);
        prop_assert_eq!(&back.paths, &sol.paths);
        prop_assert_eq!(back.status, sol.status);
        prop_assert!((back.objective - sol.objective).abs() < 1e-9);
        prop_assert_eq!(write_solution(&inst, &back, &BTreeMap::new()), write_solution(&inst, &sol, &BTreeMap::new()));
    }
}
