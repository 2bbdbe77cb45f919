use pyo3::prelude::*;
use pyo3::types::{PyDict, PyModule};

fn with_module(code: &str) {
    Python::attach(|py| {
        let m = PyModule::new(py, "lsfrp_py").unwrap();
        lsfrp_py::lsfrp_py(&m).unwrap();
        let globals = PyDict::new(py);
        globals.set_item("lsfrp_py", m).unwrap();
        globals.set_item("T1", lsfrp::io::write_instance(&lsfrp::fixtures::t1())).unwrap();
        let code = std::ffi::CString::new(code).unwrap();
        if let Err(e) = py.run(&code, Some(&globals), None) {
            e.display(py);
            panic!("python assertion failed: {e}");
        }
    });
}

#[test]
fn t1_through_every_method() {
    with_module(
        r#"
inst = lsfrp_py.Instance.from_json(T1)
assert inst.ships == ["s1"]
for m in lsfrp_py.METHODS:
    sol = lsfrp_py.solve(inst, m)
    assert sol.status == "optimal", (m, sol.status)
    assert abs(sol.objective - 676.0) < 1e-6, (m, sol.objective)
    assert lsfrp_py.verify(inst, sol) == []
    assert abs(lsfrp_py.evaluate(inst, sol) - 676.0) < 1e-6
assert sol.paths == {"s1": ["v0", "v1", "v2", "tau"]}
assert sol.demand_flows == [("m1", "s1", "v2", 50.0)]
"#,
    );
}

#[test]
fn reach_queries() {
    with_module(
        r#"
inst = lsfrp_py.Instance.from_json(T1)
assert inst.path_count("s1") == 4
assert inst.movable_demands("s1") == ["m1"]
assert inst.validate() == []
try:
    inst.path_count("s9")
    raise AssertionError("expected KeyError")
except KeyError:
    pass
"#,
    );
}

#[test]
fn generator_keywords() {
    with_module(
        r#"
a = lsfrp_py.generate(ships=2, visits=10, demands=5, seed=3, sail_cost=(100, 200))
b = lsfrp_py.generate(ships=2, visits=10, demands=5, seed=3, sail_cost=(100, 200))
assert a.to_json() == b.to_json()
assert len(a.ships) == 2 and len(a.visits) == 10 and len(a.demands) == 5
for bad in [dict(ships=0), dict(colour="red"), dict(density="x")]:
    try:
        lsfrp_py.generate(**bad)
        raise AssertionError(bad)
    except ValueError:
        pass
"#,
    );
}

#[test]
fn bad_input_raises_value_error() {
    with_module(
        r#"
import json
doc = json.loads(T1)
doc["arcs"][0]["to"] = "v9"
try:
    lsfrp_py.Instance.from_json(json.dumps(doc))
    raise AssertionError("accepted a dangling reference")
except ValueError as e:
    assert "v9" in str(e)
inst = lsfrp_py.Instance.from_json(T1)
for kwargs in [dict(method="simplex"), dict(method="revised", split_rule="none"), dict(method="revised", time_limit=-1.0)]:
    try:
        lsfrp_py.solve(inst, **kwargs)
        raise AssertionError(kwargs)
    except ValueError:
        pass
"#,
    );
}

#[test]
fn compare_and_solution_json() {
    with_module(
        r#"
import json
inst = lsfrp_py.Instance.from_json(T1)
text, agree = lsfrp_py.compare(inst, ["revised", "colgen-lazy"], oracle=True)
assert agree and "oracle" in text
sol = lsfrp_py.solve(inst.with_empty_revenue(100), "colgen")
doc = json.loads(sol.to_json({"seed": "1"}))
assert doc["objective"] == 676.0 and doc["metadata"] == {"seed": "1"}
refused = lsfrp_py.solve(inst, "oracle", oracle_budget=1)
assert refused.status == "refused", refused.status
"#,
    );
}
