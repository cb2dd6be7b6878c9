//! Dense and symbol-specific sparse IDE solvers.
//!
//! The [`ir`] module parses a small three-address language and builds an
//! interprocedural CFG. [`solver`] is a generic IDE tabulation solver and
//! [`sparse`] runs the same algorithm over per-symbol sparse CFGs. [`lcp`]
//! provides linear constant propagation (and a taint client) as problems
//! for both solvers; [`bench`] compares the two on a corpus and on
//! generated programs.

pub mod ir;
pub mod lattice;
pub mod lcp;
pub mod solver;
pub mod sparse;
pub mod analysis;
pub mod bench;
pub mod cli;
