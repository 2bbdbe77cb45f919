//! One entry point for every solution method.

use std::time::{Duration, Instant};

use crate::colgen::{self, ArcFlowPricing, ColgenConfig};
use crate::formulations;
use crate::instance::{Instance, ReachError, ReachIndex};
use crate::lazy::{self, SplitRule};
use crate::lp::MipError;
use crate::oracle::{self, OracleError};
use crate::solution::{Method, Solution, SolveStatus};

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub time_limit: Option<Duration>,
    /// Add one column per ship per pass instead of re-solving the master
    /// after every column.
    pub batched: bool,
    pub split_rule: SplitRule,
    pub oracle_budget: u128,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            time_limit: None,
            batched: false,
            split_rule: SplitRule::Sound,
            oracle_budget: oracle::DEFAULT_BUDGET,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error(transparent)]
    Reach(#[from] ReachError),
    #[error(transparent)]
    Mip(#[from] MipError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("{0}")]
    Model(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

/// Solves `inst` with `method`. Oracle refusals come back as a solution
/// with status [`SolveStatus::Refused`].
pub fn solve(inst: &Instance, method: Method, options: &SolveOptions) -> Result<Solution, SolveError> {
    let start = Instant::now();
    let mut sol = match method {
        Method::Oracle => match oracle::brute_force_solve(inst, options.oracle_budget) {
            Ok(sol) => sol,
            Err(OracleError::OverBudget { .. }) => Solution::without_routing(method, SolveStatus::Refused, inst.ships.len()),
            Err(e) => return Err(e.into()),
        },
        _ => {
            let reach = ReachIndex::new(inst)?;
            match method {
                Method::Reduced | Method::ReducedTight | Method::Revised => {
                    formulations::solve_arc_flow(inst, &reach, method, options.time_limit)?
                }
                Method::Colgen => {
                    let config = ColgenConfig::from_options(options);
                    let mut engine = ArcFlowPricing::new(inst, &reach);
                    colgen::run_column_generation(inst, &reach, &mut engine, &config)?
                }
                Method::ColgenLazy => lazy::run_colgen_lazy(inst, &reach, options)?,
                Method::Oracle => unreachable!(),
            }
        }
    };
    sol.method = method;
    sol.wall_seconds = start.elapsed().as_secs_f64();
    Ok(sol)
}
