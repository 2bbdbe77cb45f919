//! Exact solvers for fleet repositioning with cargo flows on acyclic
//! time-space graphs.

pub mod colgen;
pub mod fixtures;
pub mod formulations;
pub mod instance;
pub mod io;
pub mod lazy;
pub mod lp;
pub mod oracle;
pub mod report;
pub mod solution;
pub mod solve;

pub use solve::{solve, SolveError, SolveOptions};
