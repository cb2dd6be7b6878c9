//! Linear constant propagation.
//!
//! Facts are program symbols (locals, length-one field paths, static
//! fields, array cells with literal index) plus `Λ`. Values live in the
//! flat integer lattice; edge functions are the [`LcpEdge`] family.

mod alias;
mod edge;
mod problem;
mod taint;

pub use crate::lattice::{meet_value, LatticeValue};
pub use alias::{compute_aliases, AliasAnalysis, QualifiedLocal};
pub use edge::{apply, compose, meet_edge, LcpEdge};
pub use problem::{EdgeKind, LcpProblem, Symbol, RETURN_LOCAL};
pub use taint::{taint_problem, TaintProblem};
