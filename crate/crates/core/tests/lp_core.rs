use proptest::prelude::*;

use lsfrp::lp::{solve_lp, solve_lp_with, solve_mip, LazyRow, LinearModel, LpOptions, LpStatus, MipOptions, MipStatus, Sense, VarId, TOL_FEAS};

#[derive(Clone, Debug)]
struct RandomLp {
    c: Vec<f64>,
    upper: Vec<f64>,
    rows: Vec<(Vec<f64>, Sense, f64)>,
}

fn random_lp(max_vars: usize, max_rows: usize) -> impl Strategy<Value = RandomLp> {
    (1..=max_vars, 1..=max_rows).prop_flat_map(|(n, m)| {
        let sense = prop_oneof![4 => Just(Sense::Le), 1 => Just(Sense::Ge), 1 => Just(Sense::Eq)];
        let row = (prop::collection::vec(-4i32..=6, n), sense, 0i32..=20);
        (
            prop::collection::vec(-5i32..=10, n),
            prop::collection::vec(1i32..=6, n),
            prop::collection::vec(row, m),
        )
            .prop_map(|(c, u, rows)| RandomLp {
                c: c.into_iter().map(f64::from).collect(),
                upper: u.into_iter().map(f64::from).collect(),
                rows: rows
                    .into_iter()
                    .map(|(a, s, b)| (a.into_iter().map(f64::from).collect(), s, f64::from(b)))
                    .collect(),
            })
    })
}

fn build(s: &RandomLp, integer: bool) -> LinearModel {
    let mut m = LinearModel::new();
    let vars: Vec<VarId> = (0..s.c.len()).map(|j| m.add_var(format!("x{j}"), 0.0, s.upper[j], s.c[j], integer)).collect();
    for (i, (a, sense, b)) in s.rows.iter().enumerate() {
        m.add_row(format!("r{i}"), vars.iter().zip(a).map(|(&v, &x)| (v, x)), *sense, *b);
    }
    m
}

/// Every integer point of the box, best feasible objective.
fn enumerate_integer(s: &RandomLp) -> Option<f64> {
    let n = s.c.len();
    let mut x = vec![0i64; n];
    let mut best: Option<f64> = None;
    loop {
        let feasible = s.rows.iter().all(|(a, sense, b)| {
            let lhs: f64 = a.iter().zip(&x).map(|(a, &x)| a * x as f64).sum();
            match sense {
                Sense::Le => lhs <= *b,
                Sense::Ge => lhs >= *b,
                Sense::Eq => lhs == *b,
            }
        });
        if feasible {
            let obj: f64 = s.c.iter().zip(&x).map(|(c, &x)| c * x as f64).sum();
            best = Some(best.map_or(obj, |b: f64| b.max(obj)));
        }
        let mut j = 0;
        loop {
            if j == n {
                return best;
            }
            if (x[j] as f64) < s.upper[j] {
                x[j] += 1;
                break;
            }
            x[j] = 0;
            j += 1;
        }
    }
}

/// Objective of the bounded-variable dual built from row duals and the
/// reduced costs they imply.
fn dual_objective(s: &RandomLp, y: &[f64]) -> f64 {
    let mut obj: f64 = s.rows.iter().zip(y).map(|((_, _, b), y)| b * y).sum();
    for j in 0..s.c.len() {
        let d = s.c[j] - s.rows.iter().zip(y).map(|((a, _, _), y)| a[j] * y).sum::<f64>();
        obj += if d > 0.0 { d * s.upper[j] } else { 0.0 };
    }
    obj
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn optimal_lp_certificates(s in random_lp(6, 5)) {
        let model = build(&s, false);
        let sol = solve_lp(&model);
        prop_assume!(sol.status == LpStatus::Optimal);
        let scale = 1.0 + sol.objective.abs();
        prop_assert!(model.max_violation(&sol.values) <= 1e-6);
        for (j, &x) in sol.values.iter().enumerate() {
            prop_assert!(x >= -TOL_FEAS && x <= s.upper[j] + TOL_FEAS);
        }
        for (i, (a, sense, b)) in s.rows.iter().enumerate() {
            let y = sol.duals[i];
            match sense {
                Sense::Le => prop_assert!(y >= -1e-7),
                Sense::Ge => prop_assert!(y <= 1e-7),
                Sense::Eq => {}
            }
            let slack = b - a.iter().zip(&sol.values).map(|(a, x)| a * x).sum::<f64>();
            prop_assert!((y * slack).abs() <= 1e-6 * scale, "row {} dual {} slack {}", i, y, slack);
        }
        prop_assert!((dual_objective(&s, &sol.duals) - sol.objective).abs() <= 1e-6 * scale);
        prop_assert!((model.objective_value(&sol.values) - sol.objective).abs() <= 1e-6 * scale);
    }

    #[test]
    fn warm_start_after_adding_a_row(s in random_lp(6, 4), extra in prop::collection::vec(0i32..=3, 6), rhs in 0i32..=8) {
        let mut model = build(&s, false);
        let first = solve_lp(&model);
        prop_assume!(first.status == LpStatus::Optimal);
        let n = s.c.len();
        model.add_row("extra", (0..n).map(|j| (VarId(j), f64::from(extra[j]))), Sense::Le, f64::from(rhs));
        let cold = solve_lp(&model);
        let warm = solve_lp_with(&model, None, first.basis.as_ref(), &LpOptions::default());
        prop_assert_eq!(cold.status, warm.status);
        if cold.status == LpStatus::Optimal {
            prop_assert!((cold.objective - warm.objective).abs() <= 1e-6 * (1.0 + cold.objective.abs()));
            prop_assert!(warm.objective <= first.objective + 1e-6 * (1.0 + first.objective.abs()));
        }
    }

    #[test]
    fn mip_matches_enumeration(s in random_lp(4, 3)) {
        let mut model = build(&s, true);
        let relaxed = solve_lp(&model.relaxed());
        let sol = solve_mip(&mut model, None, &MipOptions::default()).unwrap();
        match enumerate_integer(&s) {
            None => prop_assert_eq!(sol.status, MipStatus::Infeasible),
            Some(best) => {
                prop_assert_eq!(sol.status, MipStatus::Optimal);
                prop_assert!((sol.objective - best).abs() <= 1e-6 * (1.0 + best.abs()));
                prop_assert!(sol.objective <= sol.bound + 1e-6 * (1.0 + best.abs()));
                prop_assert!(sol.objective <= relaxed.objective + 1e-6 * (1.0 + best.abs()));
                for x in sol.values.unwrap() {
                    prop_assert!((x - x.round()).abs() <= 1e-6);
                }
            }
        }
    }

    #[test]
    fn lazy_rows_match_rows_given_up_front(s in random_lp(4, 2), lazy in prop::collection::vec(0i32..=4, 4), rhs in 0i32..=6) {
        let n = s.c.len();
        let cut: Vec<(VarId, f64)> = (0..n).map(|j| (VarId(j), f64::from(lazy[j]))).collect();
        let mut upfront = build(&s, true);
        upfront.add_row("cut", cut.clone(), Sense::Le, f64::from(rhs));
        let expected = solve_mip(&mut upfront, None, &MipOptions::default()).unwrap();

        let mut model = build(&s, true);
        let mut added = false;
        let mut callback = |_: &LinearModel, x: &[f64]| {
            let lhs: f64 = cut.iter().map(|&(v, a)| a * x[v.0]).sum();
            if !added && lhs > f64::from(rhs) + 1e-6 {
                added = true;
                vec![LazyRow { name: "cut".into(), terms: cut.clone(), sense: Sense::Le, rhs: f64::from(rhs) }]
            } else {
                Vec::new()
            }
        };
        let sol = solve_mip(&mut model, Some(&mut callback), &MipOptions::default()).unwrap();
        prop_assert_eq!(sol.status, expected.status);
        if sol.status == MipStatus::Optimal {
            prop_assert!((sol.objective - expected.objective).abs() <= 1e-6 * (1.0 + expected.objective.abs()));
            prop_assert_eq!(sol.cuts_added, usize::from(added));
        }
    }
}

#[test]
fn infeasible_and_unbounded_are_recognised() {
    let mut m = LinearModel::new();
    let x = m.add_continuous("x", 0.0, 1.0, 1.0);
    m.add_row("r", [(x, 1.0)], Sense::Ge, 2.0);
    assert_eq!(solve_lp(&m).status, LpStatus::Infeasible);

    let mut m = LinearModel::new();
    let x = m.add_continuous("x", 0.0, f64::INFINITY, 1.0);
    let y = m.add_continuous("y", 0.0, f64::INFINITY, 0.0);
    m.add_row("r", [(x, 1.0), (y, -1.0)], Sense::Le, 1.0);
    assert_eq!(solve_lp(&m).status, LpStatus::Unbounded);
}

#[test]
fn unsound_lazy_row_is_an_error() {
    let mut m = LinearModel::new();
    let x = m.add_binary("x", 1.0);
    let mut callback = |_: &LinearModel, _: &[f64]| vec![LazyRow { name: "loose".into(), terms: vec![(x, 1.0)], sense: Sense::Le, rhs: 5.0 }];
    assert!(solve_mip(&mut m, Some(&mut callback), &MipOptions::default()).is_err());
}
