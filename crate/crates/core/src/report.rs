//! Side-by-side comparison of methods on one instance.

use std::fmt::Write as _;

use crate::instance::Instance;
use crate::lp::TOL_GAP;
use crate::solution::{Method, Solution, SolveStatus};
use crate::solve::{solve, SolveError, SolveOptions};

/// Columns of the CSV report, in order.
pub const CSV_HEADER: &str =
    "instance,empty_revenue,method,status,objective,bound,wall_seconds,columns,branch_nodes,gamma_dc,gamma_rf,rows,cols,nnz,agreement";

#[derive(Clone, Debug, PartialEq)]
pub struct RunRow {
    pub instance: String,
    /// Empty-equipment revenue override in cents, if any.
    pub empty_revenue: Option<i64>,
    pub method: Method,
    pub status: SolveStatus,
    pub objective: f64,
    pub bound: f64,
    pub wall_seconds: f64,
    pub columns: usize,
    pub branch_nodes: usize,
    pub gamma_dc: usize,
    pub gamma_rf: usize,
    pub model: Option<(usize, usize, usize)>,
    /// Per-ship (id, gamma_dc, gamma_rf, splits) for lazy runs.
    pub ships: Vec<(String, usize, usize, usize)>,
    pub mismatch: bool,
}

impl RunRow {
    pub fn from_solution(inst: &Instance, empty_revenue: Option<i64>, sol: &Solution) -> RunRow {
        let d = &sol.diagnostics;
        RunRow {
            instance: inst.name.clone(),
            empty_revenue,
            method: sol.method,
            status: sol.status,
            objective: sol.objective,
            bound: sol.bound,
            wall_seconds: sol.wall_seconds,
            columns: d.columns,
            branch_nodes: d.branch_nodes,
            gamma_dc: d.cuts_dc,
            gamma_rf: d.cuts_rf,
            model: d.model_size.map(|m| (m.rows, m.cols, m.nnz)),
            ships: d
                .ships
                .iter()
                .map(|s| (s.ship.clone(), s.gamma_dc, s.gamma_rf, s.splits))
                .collect(),
            mismatch: false,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunReport {
    pub rows: Vec<RunRow>,
}

/// Whether two optima agree within the relative gap tolerance.
pub fn agree(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOL_GAP * (1.0 + a.abs().max(b.abs()))
}

fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.2}")
    } else {
        "-".into()
    }
}

impl RunReport {
    /// Flags every optimal row whose objective differs from the reference of
    /// its group: the oracle when present, else the first optimal row.
    pub fn check_agreement(&mut self) -> bool {
        let mut groups: Vec<Option<i64>> = self.rows.iter().map(|r| r.empty_revenue).collect();
        groups.dedup();
        let mut all = true;
        for g in groups {
            let optimal = |r: &&RunRow| r.empty_revenue == g && r.status == SolveStatus::Optimal;
            let reference = self
                .rows
                .iter()
                .filter(optimal)
                .find(|r| r.method == Method::Oracle)
                .or_else(|| self.rows.iter().find(optimal))
                .map(|r| r.objective);
            let Some(reference) = reference else { continue };
            for r in self.rows.iter_mut() {
                if r.empty_revenue == g && r.status == SolveStatus::Optimal && !agree(r.objective, reference) {
                    r.mismatch = true;
                    all = false;
                }
            }
        }
        all
    }

    pub fn has_mismatch(&self) -> bool {
        self.rows.iter().any(|r| r.mismatch)
    }

    fn cells(r: &RunRow) -> Vec<String> {
        let (rows, cols, nnz) = r.model.map_or(("-".into(), "-".into(), "-".into()), |(a, b, c)| {
            (a.to_string(), b.to_string(), c.to_string())
        });
        vec![
            r.instance.clone(),
            r.empty_revenue.map_or("-".into(), |v| v.to_string()),
            r.method.as_str().into(),
            r.status.as_str().into(),
            num(r.objective),
            num(r.bound),
            format!("{:.3}", r.wall_seconds),
            r.columns.to_string(),
            r.branch_nodes.to_string(),
            r.gamma_dc.to_string(),
            r.gamma_rf.to_string(),
            rows,
            cols,
            nnz,
            if r.mismatch { "MISMATCH".into() } else { "ok".into() },
        ]
    }

    /// Aligned text table.
    pub fn to_text(&self) -> String {
        let header: Vec<String> = CSV_HEADER.split(',').map(str::to_string).collect();
        let body: Vec<Vec<String>> = self.rows.iter().map(Self::cells).collect();
        let widths: Vec<usize> = (0..header.len())
            .map(|c| body.iter().map(|r| r[c].len()).chain([header[c].len()]).max().unwrap())
            .collect();
        let mut out = String::new();
        for line in std::iter::once(&header).chain(&body) {
            let cells: Vec<String> = line
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(c, (s, w))| if c < 4 { format!("{s:<w$}") } else { format!("{s:>w$}") })
                .collect();
            writeln!(out, "{}", cells.join("  ").trim_end()).unwrap();
        }
        let lazy: Vec<&RunRow> = self.rows.iter().filter(|r| !r.ships.is_empty()).collect();
        if !lazy.is_empty() {
            writeln!(out, "\nships affected by lazy constraints").unwrap();
            for r in lazy {
                let dc = r.ships.iter().filter(|s| s.1 > 0).count();
                let rf = r.ships.iter().filter(|s| s.2 > 0).count();
                let splits: usize = r.ships.iter().map(|s| s.3).sum();
                writeln!(
                    out,
                    "  {} empty_revenue={} ships={} with_dc_cuts={} with_rf_cuts={} gamma_dc={} gamma_rf={} splits={}",
                    r.method.as_str(),
                    r.empty_revenue.map_or("-".into(), |v| v.to_string()),
                    r.ships.len(),
                    dc,
                    rf,
                    r.gamma_dc,
                    r.gamma_rf,
                    splits
                )
                .unwrap();
            }
        }
        let mut revenues: Vec<Option<i64>> = self.rows.iter().map(|r| r.empty_revenue).collect();
        revenues.dedup();
        if revenues.len() == 2 {
            writeln!(out, "\nobjective by empty revenue ({} -> {})", fmt_rev(revenues[0]), fmt_rev(revenues[1])).unwrap();
            for m in Method::ALL {
                let pick = |g| self.rows.iter().find(|r| r.method == m && r.empty_revenue == g);
                if let (Some(a), Some(b)) = (pick(revenues[0]), pick(revenues[1])) {
                    writeln!(out, "  {:<13} {:>14} {:>14}", m.as_str(), num(a.objective), num(b.objective)).unwrap();
                }
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&Self::cells(r).join(","));
            out.push('\n');
        }
        out
    }
}

fn fmt_rev(r: Option<i64>) -> String {
    r.map_or("as given".into(), |v| v.to_string())
}

/// Runs every method on `inst` once per empty-revenue setting (cents; none
/// means the instance as given) and flags disagreements.
pub fn compare(inst: &Instance, methods: &[Method], empty_revenues: &[Option<i64>], options: &SolveOptions) -> Result<RunReport, SolveError> {
    let mut report = RunReport::default();
    for &rev in empty_revenues {
        let variant = match rev {
            Some(c) => inst.with_empty_revenue(crate::instance::Cents(c)),
            None => inst.clone(),
        };
        for &m in methods {
            let sol = solve(&variant, m, options)?;
            report.rows.push(RunRow::from_solution(inst, rev, &sol));
        }
    }
    report.check_agreement();
    Ok(report)
}
