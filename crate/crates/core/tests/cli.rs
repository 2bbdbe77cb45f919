use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn lsfrp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lsfrp")).args(args).output().unwrap()
}

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name).display().to_string()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn objective(out: &Output) -> f64 {
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    v["objective"].as_f64().unwrap()
}

#[test]
fn solve_t1_with_lazy_pricing() {
    let out = lsfrp(&["solve", "--instance", &data("t1.json"), "--method", "colgen-lazy"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(objective(&out), 676.0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("objective=676.00"));
}

#[test]
fn seed_is_recorded_in_metadata() {
    let out = lsfrp(&["solve", "--instance", &data("t1.json"), "--method", "revised", "--seed", "42"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["metadata"]["seed"], "42");
    assert_eq!(v["metadata"]["method"], "revised");
}

#[test]
fn oracle_over_budget_refuses() {
    let out = lsfrp(&["solve", "--instance", &data("shared_corridor.json"), "--method", "oracle", "--oracle-budget", "1"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("oracle refused"));
}

#[test]
fn empty_revenue_never_lowers_the_optimum() {
    let base = lsfrp(&["solve", "--instance", &data("empties.json"), "--method", "colgen-lazy"]);
    let high = lsfrp(&["solve", "--instance", &data("empties.json"), "--method", "colgen-lazy", "--empty-revenue", "30000"]);
    assert_eq!(base.status.code(), Some(0));
    assert_eq!(high.status.code(), Some(0));
    assert!(objective(&high) >= objective(&base));
}

#[test]
fn compare_t1_agrees() {
    let csv = scratch("t1.csv");
    let out = lsfrp(&[
        "compare",
        "--instance",
        &data("t1.json"),
        "--methods",
        "reduced,reduced-tight,revised,colgen,colgen-lazy",
        "--oracle",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 6);
    for r in rows {
        let cells: Vec<&str> = r.split(',').collect();
        assert_eq!(cells[4], "676.00");
        assert_eq!(cells[14], "ok");
    }
}

#[test]
fn compare_reports_an_empty_revenue_pair() {
    let out = lsfrp(&[
        "compare",
        "--instance",
        &data("empties.json"),
        "--methods",
        "revised,colgen-lazy",
        "--empty-revenue",
        "0",
        "--empty-revenue",
        "30000",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    let pair = text.split("objective by empty revenue (0 -> 30000)").nth(1).expect("pair table");
    for line in pair.lines().filter(|l| !l.trim().is_empty()) {
        let nums: Vec<f64> = line.split_whitespace().skip(1).map(|x| x.parse().unwrap()).collect();
        assert!(nums[1] >= nums[0], "{line}");
    }
}

#[test]
fn generate_is_reproducible() {
    let a = scratch("gen_a.json");
    let b = scratch("gen_b.json");
    let flags = ["generate", "--ships", "3", "--visits", "36", "--demands", "28", "--seed", "7", "--out"];
    let run = |p: &PathBuf| lsfrp(&[&flags[..], &[p.to_str().unwrap()]].concat());
    let out = run(&a);
    assert_eq!(out.status.code(), Some(0));
    run(&b);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let stats = String::from_utf8_lossy(&out.stdout);
    assert!(stats.contains("|S|=3") && stats.contains("|V|=36") && stats.contains("|M|=28"), "{stats}");
}

#[test]
fn zero_demands_is_pure_routing() {
    let path = scratch("routing.json");
    let gen = lsfrp(&["generate", "--ships", "2", "--visits", "10", "--demands", "0", "--empty-points", "0", "--seed", "3", "--out", path.to_str().unwrap()]);
    assert_eq!(gen.status.code(), Some(0));
    let mut values = Vec::new();
    for m in ["reduced", "reduced-tight", "revised", "colgen", "colgen-lazy", "oracle"] {
        let out = lsfrp(&["solve", "--instance", path.to_str().unwrap(), "--method", m]);
        assert_eq!(out.status.code(), Some(0), "{m}");
        let v: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert!(v["demand_flows"].as_array().unwrap().is_empty());
        values.push(v["objective"].as_f64().unwrap());
    }
    assert!(values.iter().all(|x| (x - values[0]).abs() < 1e-6));
    assert!(values[0] <= 0.0);
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(lsfrp(&["solve", "--instance", &data("t1.json"), "--method", "simplex"]).status.code(), Some(64));
    assert_eq!(lsfrp(&["solve", "--bogus"]).status.code(), Some(64));
    assert_eq!(lsfrp(&["generate", "--ships", "0"]).status.code(), Some(64));
    assert_eq!(lsfrp(&[]).status.code(), Some(64));
}

#[test]
fn help_exits_zero() {
    let out = lsfrp(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("generate"));
}

#[test]
fn missing_file_is_an_error() {
    let out = lsfrp(&["solve", "--instance", "/nonexistent/x.json", "--method", "revised"]);
    assert_eq!(out.status.code(), Some(1));
}
