use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Duration;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use lsfrp::instance::{Cents, Instance};
use lsfrp::io::{generate_random, parse_instance, write_instance, write_solution, GeneratorParams};
use lsfrp::lazy::SplitRule;
use lsfrp::oracle::DEFAULT_BUDGET;
use lsfrp::report;
use lsfrp::solution::{Method, SolveStatus};
use lsfrp::{solve, SolveOptions};

const EXIT_USAGE: u8 = 64;

#[derive(Parser, Debug)]
#[command(name = "lsfrp", version, about = "Fleet repositioning with cargo flows")]
struct Cli {
    /// Log solver progress to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one instance with one method.
    Solve(SolveArgs),
    /// Run several methods on one instance and check that they agree.
    Compare(CompareArgs),
    /// Write a random instance.
    Generate(GenerateArgs),
}

#[derive(Args, Debug, Clone)]
struct Tuning {
    /// Per-method time limit in seconds.
    #[arg(long, value_parser = parse_seconds)]
    time_limit: Option<f64>,
    /// When multi-destination demands get one flow variable per destination.
    #[arg(long, default_value = "sound", value_parser = parse_split_rule)]
    split_rule: SplitRule,
    /// Add one column per ship before re-solving the master.
    #[arg(long)]
    batched: bool,
    /// Largest number of path combinations the oracle will enumerate.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    oracle_budget: u128,
}

impl Tuning {
    fn options(&self) -> SolveOptions {
        SolveOptions {
            time_limit: self.time_limit.map(Duration::from_secs_f64),
            batched: self.batched,
            split_rule: self.split_rule,
            oracle_budget: self.oracle_budget,
        }
    }

    fn record(&self, meta: &mut BTreeMap<String, String>) {
        if let Some(t) = self.time_limit {
            meta.insert("time_limit".into(), t.to_string());
        }
        meta.insert("split_rule".into(), self.split_rule.as_str().into());
        meta.insert("batched".into(), self.batched.to_string());
        meta.insert("oracle_budget".into(), self.oracle_budget.to_string());
    }
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_parser = parse_method)]
    method: Method,
    /// Revenue per TEU of delivered empty equipment, in cents, for both types.
    #[arg(long)]
    empty_revenue: Option<i64>,
    /// Write the solution here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Recorded in the output metadata; every method is deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    tuning: Tuning,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Comma-separated method names.
    #[arg(long, value_delimiter = ',', value_parser = parse_method, default_value = "reduced,revised,colgen,colgen-lazy")]
    methods: Vec<Method>,
    /// Also run the brute-force oracle and use it as the reference.
    #[arg(long)]
    oracle: bool,
    /// Empty-equipment revenue in cents; give twice for a before/after pair.
    #[arg(long)]
    empty_revenue: Vec<i64>,
    /// Also write the report as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    tuning: Tuning,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long)]
    ships: Option<usize>,
    #[arg(long)]
    ship_types: Option<usize>,
    #[arg(long)]
    visits: Option<usize>,
    #[arg(long)]
    ports: Option<usize>,
    #[arg(long)]
    density: Option<f64>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    demands: Option<usize>,
    #[arg(long)]
    reefer_fraction: Option<f64>,
    #[arg(long)]
    multi_destination_fraction: Option<f64>,
    #[arg(long)]
    unequal_destination_costs: bool,
    #[arg(long)]
    empty_points: Option<usize>,
    /// Cents per TEU.
    #[arg(long)]
    empty_revenue: Option<i64>,
    /// Ranges are `lo,hi`; money in cents.
    #[arg(long, value_parser = parse_range::<i64>)]
    sail_cost: Option<(i64, i64)>,
    #[arg(long, value_parser = parse_range::<i64>)]
    port_fee: Option<(i64, i64)>,
    #[arg(long, value_parser = parse_range::<i64>)]
    move_cost: Option<(i64, i64)>,
    #[arg(long, value_parser = parse_range::<i64>)]
    revenue: Option<(i64, i64)>,
    #[arg(long, value_parser = parse_range::<u32>)]
    amount: Option<(u32, u32)>,
    #[arg(long, value_parser = parse_range::<u32>)]
    capacity_dc: Option<(u32, u32)>,
    #[arg(long, value_parser = parse_range::<f64>)]
    reefer_share: Option<(f64, f64)>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl GenerateArgs {
    fn params(&self) -> GeneratorParams {
        let mut p = GeneratorParams::default();
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { p.$f = v; } )* };
        }
        set!(ships, ship_types, visits, ports, density, window, demands, reefer_fraction,
             multi_destination_fraction, empty_points, empty_revenue, sail_cost, port_fee,
             move_cost, revenue, amount, capacity_dc, reefer_share, seed);
        p.unequal_destination_costs = self.unequal_destination_costs;
        p
    }
}

fn parse_method(s: &str) -> Result<Method, String> {
    Method::parse(s).ok_or_else(|| {
        let names: Vec<&str> = Method::ALL.iter().map(|m| m.as_str()).collect();
        format!("unknown method `{s}` (expected one of {})", names.join(", "))
    })
}

fn parse_split_rule(s: &str) -> Result<SplitRule, String> {
    SplitRule::parse(s).ok_or_else(|| format!("unknown split rule `{s}` (expected disabled, overtaking or sound)"))
}

fn parse_seconds(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(t) if t.is_finite() && t > 0.0 => Ok(t),
        _ => Err(format!("`{s}` is not a positive number of seconds")),
    }
}

fn parse_range<T: FromStr>(s: &str) -> Result<(T, T), String> {
    let (a, b) = s.split_once(',').ok_or("expected `lo,hi`")?;
    let num = |x: &str| x.trim().parse::<T>().map_err(|_| format!("bad number `{x}`"));
    Ok((num(a)?, num(b)?))
}

fn read_instance(path: &Path) -> Result<Instance, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_instance(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn write_out(path: &Path, text: &str) -> Result<(), String> {
    fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

fn status_code(status: SolveStatus) -> u8 {
    match status {
        SolveStatus::Optimal => 0,
        SolveStatus::TimeLimit => 2,
        SolveStatus::Infeasible | SolveStatus::Refused => 3,
        SolveStatus::NumericalFailure => 1,
    }
}

fn cmd_solve(a: &SolveArgs) -> Result<u8, String> {
    let mut inst = read_instance(&a.instance)?;
    if let Some(r) = a.empty_revenue {
        inst = inst.with_empty_revenue(Cents(r));
    }
    let sol = solve(&inst, a.method, &a.tuning.options()).map_err(|e| e.to_string())?;

    let mut meta = BTreeMap::new();
    meta.insert("command".into(), "solve".into());
    meta.insert("instance".into(), a.instance.display().to_string());
    meta.insert("method".into(), a.method.as_str().into());
    meta.insert("seed".into(), a.seed.to_string());
    if let Some(r) = a.empty_revenue {
        meta.insert("empty_revenue".into(), r.to_string());
    }
    a.tuning.record(&mut meta);
    let text = write_solution(&inst, &sol, &meta);
    match &a.out {
        Some(p) => write_out(p, &text)?,
        None => print!("{text}"),
    }

    let summary = format!(
        "{} {} status={} objective={:.2} bound={:.2} wall={:.3}s",
        inst.name,
        a.method.as_str(),
        sol.status.as_str(),
        sol.objective,
        sol.bound,
        sol.wall_seconds
    );
    if a.out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    if sol.status == SolveStatus::Refused {
        eprintln!("oracle refused: path combinations exceed the budget of {}", a.tuning.oracle_budget);
    }
    Ok(status_code(sol.status))
}

fn cmd_compare(a: &CompareArgs) -> Result<u8, String> {
    let inst = read_instance(&a.instance)?;
    let mut methods = a.methods.clone();
    if a.oracle && !methods.contains(&Method::Oracle) {
        methods.push(Method::Oracle);
    }
    let revenues: Vec<Option<i64>> = if a.empty_revenue.is_empty() {
        vec![None]
    } else {
        a.empty_revenue.iter().map(|&r| Some(r)).collect()
    };
    let report = report::compare(&inst, &methods, &revenues, &a.tuning.options()).map_err(|e| e.to_string())?;
    print!("{}", report.to_text());
    if let Some(p) = &a.csv {
        write_out(p, &report.to_csv())?;
    }
    if report.has_mismatch() {
        eprintln!("MISMATCH: methods disagree on the optimum");
        return Ok(1);
    }
    Ok(0)
}

fn cmd_generate(a: &GenerateArgs) -> Result<u8, String> {
    let params = a.params();
    let inst = match generate_random(&params) {
        Ok(inst) => inst,
        Err(e) => {
            eprintln!("{e}");
            return Ok(EXIT_USAGE);
        }
    };
    let text = write_instance(&inst);
    match &a.out {
        Some(p) => write_out(p, &text)?,
        None => print!("{text}"),
    }
    let stats = format!(
        "{:<16} |S|={:<3} |V|={:<4} |A|={:<5} |M|={:<4} seed={}",
        inst.name,
        inst.ships.len(),
        inst.visits.len(),
        inst.arcs.len(),
        inst.demands.len(),
        params.seed
    );
    if a.out.is_some() {
        println!("{stats}");
    } else {
        eprintln!("{stats}");
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Generate(a) => cmd_generate(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
