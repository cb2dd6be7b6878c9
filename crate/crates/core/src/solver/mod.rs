//! Generic IDE solver.
//!
//! Phase I tabulates jump functions (start of a procedure to a node) and
//! summary functions (call site to return site) over the exploded
//! supergraph. Phase II evaluates them into a [`ValueMap`]. The same
//! tabulation engine drives the dense solver here and the sparse solver in
//! [`crate::sparse`]; they differ only in where intraprocedural results are
//! sent.

mod tables;
mod tabulate;
mod values;

use std::fmt::Debug;
use std::time::Duration;

use crate::ir::{CallSite, NodeId, ProcId, Supergraph};

pub use tables::{JumpTable, SummaryTable};
pub(crate) use tabulate::{Successors, Tabulator};
pub use values::{compute_phase2, query_value, ValueMap};

/// A data-flow fact (program symbol), interned by the problem.
/// `Fact::LAMBDA` is the tautological fact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fact(pub u32);

impl Fact {
    pub const LAMBDA: Fact = Fact(0);

    pub fn is_lambda(self) -> bool {
        self == Fact::LAMBDA
    }
}

/// An environment transformer for a single symbol, closed under
/// composition and meet.
pub trait EdgeFunction: Clone + PartialEq + Debug {
    type Value: Clone + PartialEq + Debug;

    fn identity() -> Self;
    /// `λl.⊤`, the meet-neutral element and the meaning of an absent table entry.
    fn all_top() -> Self;
    fn is_all_top(&self) -> bool;
    /// `self` first, then `then`.
    fn compose(&self, then: &Self) -> Self;
    fn meet(&self, other: &Self) -> Self;
    fn apply(&self, value: &Self::Value) -> Self::Value;
}

/// Output buffer for flow functions: target facts with their edge functions.
pub type FlowOut<F> = Vec<(Fact, F)>;

/// A client analysis: flow functions, edge functions and the value lattice.
///
/// Flow methods push `(target fact, edge function)` pairs for one source
/// fact into `out`; an empty result kills the fact.
pub trait IdeProblem {
    type Value: Clone + PartialEq + Debug;
    type EdgeFn: EdgeFunction<Value = Self::Value>;

    fn top(&self) -> Self::Value;
    fn bottom(&self) -> Self::Value;
    fn meet_value(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;

    /// Longest strictly descending chain of edge functions; the tabulation
    /// aborts if a single table entry changes more often than this.
    fn chain_height(&self) -> usize;

    /// Flow at an intraprocedural node (statement, start, exit, label).
    fn normal_flow(&self, node: NodeId, d: Fact, out: &mut FlowOut<Self::EdgeFn>);
    /// Caller fact at the call site to callee facts at the callee start.
    fn call_flow(&self, site: &CallSite, d: Fact, out: &mut FlowOut<Self::EdgeFn>);
    /// Callee fact at its exit to caller facts at the return site.
    fn return_flow(&self, site: &CallSite, d: Fact, out: &mut FlowOut<Self::EdgeFn>);
    /// Caller fact at the call site to caller facts at the return site.
    fn call_to_return_flow(&self, site: &CallSite, d: Fact, out: &mut FlowOut<Self::EdgeFn>);

    /// Heap facts (fields, statics, array cells) are kept at every call.
    fn is_heap(&self, d: Fact) -> bool;

    fn fact_name(&self, d: Fact) -> String;

    /// Conditions 1.1/1.2: the node maps `d` to exactly `{d}`, so `d` is
    /// neither affected by nor affects other facts. A call passing `d` into
    /// its callee is never an identity for `d`.
    fn is_identity_flow(&self, graph: &Supergraph, node: NodeId, d: Fact) -> bool {
        identity_flow_into(self, graph, node, d, &mut Vec::new())
    }

    /// Conditions 2.1/2.2: the node's transformer leaves `d`'s value intact
    /// and does not read it to compute another symbol, for every value.
    fn is_identity_transformer(&self, graph: &Supergraph, node: NodeId, d: Fact) -> bool;

    /// Nodes of `proc` (statements only) that are not both a flow and a
    /// transformer identity for `d`. The default scans every statement.
    fn relevant_nodes(&self, graph: &Supergraph, proc: ProcId, d: Fact) -> Vec<u32> {
        let p = graph.procedure(proc);
        (1..p.exit())
            .filter(|&i| {
                let node = NodeId::new(proc, i);
                !(self.is_identity_flow(graph, node, d) && self.is_identity_transformer(graph, node, d))
            })
            .collect()
    }
}

/// `is_identity_flow` with a caller-provided buffer. On return `out` holds
/// the flow of `d` at `node` (call-to-return flow for calls without callee
/// flow).
pub fn identity_flow_into<P: IdeProblem + ?Sized>(
    problem: &P,
    graph: &Supergraph,
    node: NodeId,
    d: Fact,
    out: &mut FlowOut<P::EdgeFn>,
) -> bool {
    out.clear();
    match graph.call_site(node) {
        Some(site) => {
            problem.call_flow(site, d, out);
            if !out.is_empty() {
                return false;
            }
            problem.call_to_return_flow(site, d, out);
        }
        None => problem.normal_flow(node, d, out),
    }
    out.len() == 1 && out[0].0 == d
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SolverError {
    #[error(
        "table entry <{d1}> -> <{node}, {d2}> changed more than {height} times; \
         the client's edge-function meet is not descending"
    )]
    ChainHeightExceeded {
        node: String,
        d1: String,
        d2: String,
        height: usize,
    },
}

/// Work and timing counters for one solver run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunStats {
    pub phase1: Duration,
    pub phase2: Duration,
    /// Number of propagations that changed a jump function (enqueue events).
    pub propagations: u64,
    pub jump_entries: usize,
    pub summary_entries: usize,
    pub peak_worklist: usize,
    pub sparse_cfg_count: usize,
    pub sparse_cfg_time: Duration,
}

impl RunStats {
    pub fn total(&self) -> Duration {
        self.phase1 + self.phase2
    }
}

pub struct Phase1<F> {
    pub jump: JumpTable<F>,
    pub summary: SummaryTable<F>,
    pub stats: RunStats,
}

struct DenseSuccessors;

impl<P: IdeProblem> Successors<P> for DenseSuccessors {
    fn after_call(&mut self, _: &P, _: &Supergraph, site: &CallSite, _: Fact, out: &mut Vec<NodeId>) {
        out.push(site.return_site);
    }

    fn after_node(&mut self, _: &P, graph: &Supergraph, node: NodeId, _: Fact, out: &mut Vec<NodeId>) {
        out.extend(graph.successors(node));
    }
}

/// Dense Phase I: every fact flows to every CFG successor.
pub fn solve_phase1<P: IdeProblem>(problem: &P, graph: &Supergraph) -> Result<Phase1<P::EdgeFn>, SolverError> {
    let mut succ = DenseSuccessors;
    Tabulator::new(problem, graph, &mut succ).run()
}

/// Dense Phase I followed by Phase II.
pub fn solve_dense<P: IdeProblem>(
    problem: &P,
    graph: &Supergraph,
) -> Result<(ValueMap<P::Value>, Phase1<P::EdgeFn>), SolverError> {
    let mut phase1 = solve_phase1(problem, graph)?;
    let start = std::time::Instant::now();
    let values = compute_phase2(problem, graph, &phase1.jump);
    phase1.stats.phase2 = start.elapsed();
    Ok((values, phase1))
}
