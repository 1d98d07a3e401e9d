//! Analysis of closed-above round-based message-passing models for k-set
//! agreement: graph parameters, upper and lower bounds, the simplicial
//! objects behind them, and an exact solvability oracle for small instances.

pub mod bounds;
pub mod budget;
pub mod error;
pub mod fuzz;
pub mod graph;
pub mod metrics;
pub mod solvability;
pub mod topology;

pub use budget::Budget;
pub use error::{Error, Result};
pub use graph::{Digraph, Model, ProcSet};
