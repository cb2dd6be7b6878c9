//! Symbol-specific sparsification of the IDE solver.
//!
//! For every procedure `p` and fact `d` reaching it, the solver lazily
//! builds `G_{p,d}`, which keeps only the nodes where `d` is not both an
//! identity flow and an identity transformer (plus control statements,
//! start and exit). Intraprocedural results are sent straight to the next
//! retained node; call seeding and summaries work as in the dense solver.
//! Values at skipped nodes are recovered on demand by [`resolve_value_at`].

mod cfg;
mod dot;
mod resolve;

use std::time::Instant;

use crate::ir::{CallSite, NodeId, Supergraph};
use crate::solver::{compute_phase2, Fact, IdeProblem, Phase1, SolverError, Successors, Tabulator, ValueMap};

pub use cfg::{build_sparse_cfg, SparseCfg, SparseCfgCache};
pub use dot::{jump_table_dot, sparse_cfg_dot};
pub use resolve::{materialize, resolve_value_at};

/// Conditions 1.1/1.2 at `node` for `d`.
pub fn is_identity_flow<P: IdeProblem>(problem: &P, graph: &Supergraph, node: NodeId, d: Fact) -> bool {
    problem.is_identity_flow(graph, node, d)
}

/// Conditions 2.1/2.2 at `node` for `d`.
pub fn is_identity_transformer<P: IdeProblem>(problem: &P, graph: &Supergraph, node: NodeId, d: Fact) -> bool {
    problem.is_identity_transformer(graph, node, d)
}

struct SparseSuccessors {
    cache: SparseCfgCache,
}

impl<P: IdeProblem> Successors<P> for SparseSuccessors {
    fn after_call(&mut self, problem: &P, graph: &Supergraph, site: &CallSite, d: Fact, out: &mut Vec<NodeId>) {
        self.cache.next_use(problem, graph, site.call, d, out);
    }

    fn after_node(&mut self, problem: &P, graph: &Supergraph, node: NodeId, d: Fact, out: &mut Vec<NodeId>) {
        self.cache.next_use(problem, graph, node, d, out);
    }
}

/// Sparse Phase I. The returned cache holds every sparse CFG built.
pub fn solve_sparse_phase1<P: IdeProblem>(
    problem: &P,
    graph: &Supergraph,
) -> Result<(Phase1<P::EdgeFn>, SparseCfgCache), SolverError> {
    let mut succ = SparseSuccessors {
        cache: SparseCfgCache::new(),
    };
    let mut phase1 = Tabulator::new(problem, graph, &mut succ).run()?;
    phase1.stats.sparse_cfg_count = succ.cache.count();
    phase1.stats.sparse_cfg_time = succ.cache.construction_time();
    Ok((phase1, succ.cache))
}

/// Result of a sparse run. `values` only covers nodes retained for each
/// fact; use [`SparseSolution::value`] or [`materialize`] elsewhere.
pub struct SparseSolution<P: IdeProblem> {
    pub values: ValueMap<P::Value>,
    pub phase1: Phase1<P::EdgeFn>,
    pub cache: SparseCfgCache,
}

impl<P: IdeProblem> SparseSolution<P> {
    pub fn value(&mut self, problem: &P, graph: &Supergraph, node: NodeId, d: Fact) -> P::Value {
        resolve_value_at(problem, graph, self, node, d)
    }
}

/// Sparse Phase I followed by Phase II.
pub fn solve_sparse<P: IdeProblem>(problem: &P, graph: &Supergraph) -> Result<SparseSolution<P>, SolverError> {
    let (mut phase1, cache) = solve_sparse_phase1(problem, graph)?;
    let start = Instant::now();
    let values = compute_phase2(problem, graph, &phase1.jump);
    phase1.stats.phase2 = start.elapsed();
    Ok(SparseSolution { values, phase1, cache })
}
