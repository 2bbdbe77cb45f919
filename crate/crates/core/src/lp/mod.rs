//! Linear and mixed-integer programming.
//!
//! [`LinearModel`] is a bounded-variable maximisation model with sparse rows.
//! [`solve_lp`] runs a revised primal simplex (product-form inverse, composite
//! phase 1) and returns primal values, row duals and the final basis, which can
//! be handed back in to warm-start a later solve of the same or a grown model.
//! [`solve_mip`] is a best-bound branch-and-bound driver with a lazy-constraint
//! callback.

mod lpformat;
mod mip;
mod simplex;

use std::fmt;

pub use mip::{solve_mip, LazyRow, MipError, MipOptions, MipSolution, MipStatus};
pub use simplex::{solve_lp, solve_lp_with, Basis, LpOptions, LpSolution, LpStatus};

/// Primal feasibility tolerance.
pub const TOL_FEAS: f64 = 1e-7;
/// Integrality tolerance.
pub const TOL_INT: f64 = 1e-6;
/// Relative optimality gap.
pub const TOL_GAP: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RowId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub objective: f64,
    pub integer: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Row {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, a)| a * values[v.0]).sum()
    }

    /// Amount by which `values` violates the row (0 when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.activity(values);
        match self.sense {
            Sense::Le => (lhs - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - lhs).max(0.0),
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// Rows, columns and non-zeros, as reported before any solve.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ModelSize {
    pub rows: usize,
    pub cols: usize,
    pub nnz: usize,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("variable {0} has inconsistent bounds [{1}, {2}]")]
    Bounds(String, f64, f64),
    #[error("row {0} has a non-finite coefficient or right-hand side")]
    NonFinite(String),
    #[error("row {0} references unknown variable {1}")]
    UnknownVar(String, usize),
}

/// A maximisation model over bounded variables.
#[derive(Clone, Debug, Default)]
pub struct LinearModel {
    vars: Vec<Variable>,
    rows: Vec<Row>,
    /// Column-wise copy of the constraint matrix: (row index, coefficient).
    cols: Vec<Vec<(usize, f64)>>,
}

impl LinearModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        lower: f64,
        upper: f64,
        objective: f64,
        integer: bool,
    ) -> VarId {
        self.vars.push(Variable {
            name: name.into(),
            lower,
            upper,
            objective,
            integer,
        });
        self.cols.push(Vec::new());
        VarId(self.vars.len() - 1)
    }

    pub fn add_continuous(&mut self, name: impl Into<String>, lower: f64, upper: f64, objective: f64) -> VarId {
        self.add_var(name, lower, upper, objective, false)
    }

    pub fn add_binary(&mut self, name: impl Into<String>, objective: f64) -> VarId {
        self.add_var(name, 0.0, 1.0, objective, true)
    }

    /// Adds a row. Terms are sorted by variable, repeats merged and zero
    /// coefficients dropped.
    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        terms: impl IntoIterator<Item = (VarId, f64)>,
        sense: Sense,
        rhs: f64,
    ) -> RowId {
        let mut sorted: Vec<(VarId, f64)> = terms.into_iter().collect();
        sorted.sort_by_key(|&(v, _)| v);
        let mut merged: Vec<(VarId, f64)> = Vec::with_capacity(sorted.len());
        for (v, a) in sorted {
            match merged.last_mut() {
                Some((w, b)) if *w == v => *b += a,
                _ => merged.push((v, a)),
            }
        }
        merged.retain(|&(_, a)| a != 0.0);
        let r = self.rows.len();
        for &(v, a) in &merged {
            self.cols[v.0].push((r, a));
        }
        self.rows.push(Row {
            name: name.into(),
            terms: merged,
            sense,
            rhs,
        });
        RowId(r)
    }

    /// Adds a variable together with its coefficients in existing rows.
    pub fn add_column(
        &mut self,
        name: impl Into<String>,
        lower: f64,
        upper: f64,
        objective: f64,
        entries: impl IntoIterator<Item = (RowId, f64)>,
    ) -> VarId {
        let v = self.add_var(name, lower, upper, objective, false);
        let mut entries: Vec<(RowId, f64)> = entries.into_iter().filter(|&(_, a)| a != 0.0).collect();
        entries.sort_by_key(|&(r, _)| r);
        for (r, a) in entries {
            self.rows[r.0].terms.push((v, a));
            self.cols[v.0].push((r.0, a));
        }
        v
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(|r| r.terms.len()).sum()
    }

    pub fn size(&self) -> ModelSize {
        ModelSize {
            rows: self.num_rows(),
            cols: self.num_vars(),
            nnz: self.nnz(),
        }
    }

    pub fn var(&self, v: VarId) -> &Variable {
        &self.vars[v.0]
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn row(&self, r: RowId) -> &Row {
        &self.rows[r.0]
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub(crate) fn column(&self, j: usize) -> &[(usize, f64)] {
        &self.cols[j]
    }

    pub fn set_objective(&mut self, v: VarId, c: f64) {
        self.vars[v.0].objective = c;
    }

    pub fn set_bounds(&mut self, v: VarId, lower: f64, upper: f64) {
        self.vars[v.0].lower = lower;
        self.vars[v.0].upper = upper;
    }

    pub fn has_integers(&self) -> bool {
        self.vars.iter().any(|v| v.integer)
    }

    /// Copy with every integrality flag dropped.
    pub fn relaxed(&self) -> LinearModel {
        let mut m = self.clone();
        for v in &mut m.vars {
            v.integer = false;
        }
        m
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.vars.iter().zip(values).map(|(v, x)| v.objective * x).sum()
    }

    /// Largest bound or row violation of `values`.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let bounds = self
            .vars
            .iter()
            .zip(values)
            .map(|(v, &x)| (v.lower - x).max(x - v.upper).max(0.0));
        let rows = self.rows.iter().map(|r| r.violation(values));
        bounds.chain(rows).fold(0.0, f64::max)
    }

    pub fn check(&self) -> Result<(), ModelError> {
        for v in &self.vars {
            if v.lower > v.upper || v.lower.is_nan() || v.upper.is_nan() || !v.objective.is_finite() {
                return Err(ModelError::Bounds(v.name.clone(), v.lower, v.upper));
            }
        }
        for r in &self.rows {
            if !r.rhs.is_finite() || r.terms.iter().any(|(_, a)| !a.is_finite()) {
                return Err(ModelError::NonFinite(r.name.clone()));
            }
            if let Some(&(v, _)) = r.terms.iter().find(|(v, _)| v.0 >= self.vars.len()) {
                return Err(ModelError::UnknownVar(r.name.clone(), v.0));
            }
        }
        Ok(())
    }

    /// CPLEX LP text dump, for checking a model with an external solver.
    pub fn to_lp_format(&self) -> String {
        lpformat::write(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_merge_duplicate_terms() {
        let mut m = LinearModel::new();
        let x = m.add_continuous("x", 0.0, 1.0, 1.0);
        let y = m.add_continuous("y", 0.0, 1.0, 1.0);
        m.add_row("r", [(x, 1.0), (y, 2.0), (x, 3.0), (y, -2.0)], Sense::Le, 4.0);
        assert_eq!(m.row(RowId(0)).terms, vec![(x, 4.0)]);
        assert_eq!(m.column(0), &[(0, 4.0)]);
        assert!(m.column(1).is_empty());
        assert_eq!(m.size(), ModelSize { rows: 1, cols: 2, nnz: 1 });
    }

    #[test]
    fn check_rejects_inverted_bounds() {
        let mut m = LinearModel::new();
        m.add_continuous("x", 2.0, 1.0, 0.0);
        assert!(matches!(m.check(), Err(ModelError::Bounds(..))));
    }
}
