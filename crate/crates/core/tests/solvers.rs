use proptest::prelude::*;

use lsfrp::fixtures;
use lsfrp::io::{generate_random, GeneratorParams};
use lsfrp::report::agree;
use lsfrp::solution::{evaluate_objective, verify_solution, Method, SolveStatus};
use lsfrp::{solve, SolveOptions};

fn params() -> impl Strategy<Value = GeneratorParams> {
    (1usize..=3, 1usize..=2, 6usize..=11, 0usize..=8, 0.0f64..=0.6, 0usize..=3, any::<bool>(), any::<u64>()).prop_map(
        |(ships, ship_types, visits, demands, reefer_fraction, empty_points, unequal, seed)| GeneratorParams {
            ships,
            ship_types,
            visits,
            demands,
            reefer_fraction,
            empty_points,
            unequal_destination_costs: unequal,
            seed,
            ..GeneratorParams::default()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn every_method_returns_a_consistent_optimum(p in params()) {
        let inst = generate_random(&p).unwrap();
        let options = SolveOptions::default();
        let reference = solve(&inst, Method::Oracle, &options).unwrap();
        prop_assert_eq!(reference.status, SolveStatus::Optimal);
        for m in Method::ALL {
            let sol = solve(&inst, m, &options).unwrap();
            prop_assert_eq!(sol.status, SolveStatus::Optimal, "{}", m.as_str());
            let problems = verify_solution(&inst, &sol);
            prop_assert!(problems.is_empty(), "{}: {:?}", m.as_str(), problems);
            let value = evaluate_objective(&inst, &sol).unwrap();
            prop_assert!(agree(value, sol.objective), "{} reports {} but routes earn {}", m.as_str(), sol.objective, value);
            prop_assert!(agree(sol.objective, reference.objective), "{} {} vs oracle {}", m.as_str(), sol.objective, reference.objective);
            prop_assert!(sol.bound >= sol.objective - 1e-6 * (1.0 + sol.objective.abs()));
        }
    }

    #[test]
    fn empty_revenue_is_monotone(p in params(), low in 0i64..20_000, step in 0i64..20_000) {
        let inst = generate_random(&GeneratorParams { empty_points: p.empty_points.max(1), ..p }).unwrap();
        let a = solve(&inst.with_empty_revenue(lsfrp::instance::Cents(low)), Method::ColgenLazy, &SolveOptions::default()).unwrap();
        let b = solve(&inst.with_empty_revenue(lsfrp::instance::Cents(low + step)), Method::ColgenLazy, &SolveOptions::default()).unwrap();
        prop_assert!(b.objective >= a.objective - 1e-6 * (1.0 + a.objective.abs()));
    }
}

#[test]
fn fixtures_agree_with_the_oracle() {
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
        let reference = solve(&inst, Method::Oracle, &SolveOptions::default()).unwrap();
        for m in Method::ALL {
            let sol = solve(&inst, m, &SolveOptions::default()).unwrap();
            assert!(agree(sol.objective, reference.objective), "{} {}: {} vs {}", inst.name, m.as_str(), sol.objective, reference.objective);
            assert!(verify_solution(&inst, &sol).is_empty(), "{} {}", inst.name, m.as_str());
        }
    }
}

#[test]
fn time_limit_is_reported() {
    let p = GeneratorParams { ships: 3, visits: 36, demands: 28, seed: 7, ..GeneratorParams::default() };
    let inst = generate_random(&p).unwrap();
    let options = SolveOptions { time_limit: Some(std::time::Duration::from_millis(1)), ..SolveOptions::default() };
    let sol = solve(&inst, Method::Reduced, &options).unwrap();
    assert_eq!(sol.status, SolveStatus::TimeLimit);
    assert!(sol.bound >= sol.objective);
}
