//! Python bindings: `import lsfrp_py`.

use std::collections::BTreeMap;
use std::time::Duration;

use pyo3::exceptions::{PyKeyError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use lsfrp::instance::{self, Cents, ReachIndex};
use lsfrp::io::{self, GeneratorParams};
use lsfrp::lazy::SplitRule;
use lsfrp::oracle::DEFAULT_BUDGET;
use lsfrp::solution::{self, Method};
use lsfrp::{report, SolveOptions};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A validated instance.
#[pyclass(frozen, skip_from_py_object, module = "lsfrp_py")]
#[derive(Clone)]
pub struct Instance {
    pub inner: instance::Instance,
}

impl Instance {
    fn ship(&self, id: &str) -> PyResult<usize> {
        self.inner.ship_index(id).ok_or_else(|| PyKeyError::new_err(format!("unknown ship {id:?}")))
    }
}

#[pymethods]
impl Instance {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        io::parse_instance(text).map(|inner| Instance { inner }).map_err(value_error)
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| value_error(format!("{path}: {e}")))?;
        Self::from_json(&text)
    }

    fn to_json(&self) -> String {
        io::write_instance(&self.inner)
    }

    #[getter]
    fn name(&self) -> &str {
        &self.inner.name
    }

    #[getter]
    fn ships(&self) -> Vec<String> {
        self.inner.ships.iter().map(|s| s.id.clone()).collect()
    }

    #[getter]
    fn visits(&self) -> Vec<String> {
        self.inner.visits.iter().map(|v| v.id.clone()).collect()
    }

    #[getter]
    fn demands(&self) -> Vec<String> {
        self.inner.demands.iter().map(|d| d.id.clone()).collect()
    }

    #[getter]
    fn num_arcs(&self) -> usize {
        self.inner.arcs.len()
    }

    /// Copy with the empty-equipment revenue (cents per TEU) set for both types.
    fn with_empty_revenue(&self, cents: i64) -> Self {
        Instance {
            inner: self.inner.with_empty_revenue(Cents(cents)),
        }
    }

    /// List of `(kind, location, message)`; empty when the instance is sound.
    fn validate(&self) -> Vec<(String, String, String)> {
        instance::validate(&self.inner)
            .issues
            .into_iter()
            .map(|i| (format!("{:?}", i.kind), i.location, i.message))
            .collect()
    }

    fn path_count(&self, ship: &str) -> PyResult<u64> {
        instance::path_count(&self.inner, self.ship(ship)?).map_err(value_error)
    }

    fn movable_demands(&self, ship: &str) -> PyResult<Vec<String>> {
        let s = self.ship(ship)?;
        let reach = ReachIndex::new(&self.inner).map_err(value_error)?;
        let ids = reach.movable_demands(s).map_err(value_error)?;
        Ok(ids.into_iter().map(|m| self.inner.demands[m].id.clone()).collect())
    }

    fn __repr__(&self) -> String {
        format!(
            "Instance(name={:?}, ships={}, visits={}, arcs={}, demands={})",
            self.inner.name,
            self.inner.ships.len(),
            self.inner.visits.len(),
            self.inner.arcs.len(),
            self.inner.demands.len()
        )
    }
}

/// Result of one solver run.
#[pyclass(frozen, skip_from_py_object, module = "lsfrp_py")]
#[derive(Clone)]
pub struct Solution {
    pub inner: solution::Solution,
    pub instance: instance::Instance,
}

#[pymethods]
impl Solution {
    #[getter]
    fn method(&self) -> &'static str {
        self.inner.method.as_str()
    }

    #[getter]
    fn status(&self) -> &'static str {
        self.inner.status.as_str()
    }

    #[getter]
    fn objective(&self) -> f64 {
        self.inner.objective
    }

    #[getter]
    fn bound(&self) -> f64 {
        self.inner.bound
    }

    #[getter]
    fn wall_seconds(&self) -> f64 {
        self.inner.wall_seconds
    }

    /// Ship id to visit ids, start to sink.
    #[getter]
    fn paths(&self) -> BTreeMap<String, Vec<String>> {
        let inst = &self.instance;
        self.inner
            .paths
            .iter()
            .enumerate()
            .map(|(s, p)| (inst.ships[s].id.clone(), p.iter().map(|&v| inst.node_id(v).to_string()).collect()))
            .collect()
    }

    /// `(demand, ship, destination, amount)` per cargo flow.
    #[getter]
    fn demand_flows(&self) -> Vec<(String, String, String, f64)> {
        let inst = &self.instance;
        self.inner
            .demand_flows
            .iter()
            .map(|f| {
                (
                    inst.demands[f.demand].id.clone(),
                    inst.ships[f.ship].id.clone(),
                    inst.node_id(f.destination).to_string(),
                    f.amount,
                )
            })
            .collect()
    }

    #[getter]
    fn columns(&self) -> usize {
        self.inner.diagnostics.columns
    }

    #[getter]
    fn branch_nodes(&self) -> usize {
        self.inner.diagnostics.branch_nodes
    }

    /// Lazy cuts added, `(dc, rf)`.
    #[getter]
    fn cuts(&self) -> (usize, usize) {
        (self.inner.diagnostics.cuts_dc, self.inner.diagnostics.cuts_rf)
    }

    #[pyo3(signature = (metadata = None))]
    fn to_json(&self, metadata: Option<BTreeMap<String, String>>) -> String {
        io::write_solution(&self.instance, &self.inner, &metadata.unwrap_or_default())
    }

    fn __repr__(&self) -> String {
        format!(
            "Solution(method={:?}, status={:?}, objective={})",
            self.inner.method.as_str(),
            self.inner.status.as_str(),
            self.inner.objective
        )
    }
}

fn options(time_limit: Option<f64>, split_rule: &str, batched: bool, oracle_budget: u128) -> PyResult<SolveOptions> {
    let split_rule = SplitRule::parse(split_rule).ok_or_else(|| value_error(format!("unknown split rule {split_rule:?}")))?;
    if let Some(t) = time_limit {
        if !(t.is_finite() && t > 0.0) {
            return Err(value_error("time_limit must be a positive number of seconds"));
        }
    }
    Ok(SolveOptions {
        time_limit: time_limit.map(Duration::from_secs_f64),
        batched,
        split_rule,
        oracle_budget,
    })
}

fn parse_method(name: &str) -> PyResult<Method> {
    Method::parse(name).ok_or_else(|| value_error(format!("unknown method {name:?}")))
}

/// Solves `instance` with one of reduced, reduced-tight, revised, colgen,
/// colgen-lazy or oracle.
#[pyfunction]
#[pyo3(signature = (instance, method, *, time_limit = None, split_rule = "sound", batched = false, oracle_budget = DEFAULT_BUDGET))]
pub fn solve(
    py: Python<'_>,
    instance: &Instance,
    method: &str,
    time_limit: Option<f64>,
    split_rule: &str,
    batched: bool,
    oracle_budget: u128,
) -> PyResult<Solution> {
    let m = parse_method(method)?;
    let opts = options(time_limit, split_rule, batched, oracle_budget)?;
    let inst = instance.inner.clone();
    let sol = py.detach(|| lsfrp::solve(&inst, m, &opts)).map_err(value_error)?;
    Ok(Solution { inner: sol, instance: inst })
}

/// Runs several methods and returns `(report_text, agree)`.
#[pyfunction]
#[pyo3(signature = (instance, methods, *, oracle = false, time_limit = None))]
pub fn compare(py: Python<'_>, instance: &Instance, methods: Vec<String>, oracle: bool, time_limit: Option<f64>) -> PyResult<(String, bool)> {
    let mut list = methods.iter().map(|m| parse_method(m)).collect::<PyResult<Vec<_>>>()?;
    if oracle && !list.contains(&Method::Oracle) {
        list.push(Method::Oracle);
    }
    let opts = options(time_limit, "sound", false, DEFAULT_BUDGET)?;
    let inst = instance.inner.clone();
    let rep = py.detach(|| report::compare(&inst, &list, &[None], &opts)).map_err(value_error)?;
    Ok((rep.to_text(), !rep.has_mismatch()))
}

/// Random instance. Keyword arguments override the generator defaults and
/// use the same names as the `generate` command (ranges as 2-tuples).
#[pyfunction]
#[pyo3(signature = (**params))]
pub fn generate(params: Option<&Bound<'_, PyDict>>) -> PyResult<Instance> {
    let mut merged = serde_json::to_value(GeneratorParams::default()).map_err(value_error)?;
    if let Some(params) = params {
        let json = params.py().import("json")?.call_method1("dumps", (params,))?.extract::<String>()?;
        let overrides: serde_json::Map<String, serde_json::Value> = serde_json::from_str(&json).map_err(value_error)?;
        for (k, v) in overrides {
            if merged.get(&k).is_none() {
                return Err(value_error(format!("unknown generator parameter {k:?}")));
            }
            merged[k] = v;
        }
    }
    let p: GeneratorParams = serde_json::from_value(merged).map_err(value_error)?;
    io::generate_random(&p).map(|inner| Instance { inner }).map_err(value_error)
}

/// Recomputes the profit of `solution` from its routes and flows.
#[pyfunction]
pub fn evaluate(instance: &Instance, solution: &Solution) -> PyResult<f64> {
    solution::evaluate_objective(&instance.inner, &solution.inner).map_err(value_error)
}

/// Constraint violations of `solution`; empty when feasible.
#[pyfunction]
pub fn verify(instance: &Instance, solution: &Solution) -> Vec<String> {
    solution::verify_solution(&instance.inner, &solution.inner)
}

#[pymodule]
pub fn lsfrp_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Instance>()?;
    m.add_class::<Solution>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add("METHODS", Method::ALL.iter().map(|m| m.as_str()).collect::<Vec<_>>())?;
    Ok(())
}
