use std::time::{Duration, Instant};

use rustc_hash::FxHashMap;

use crate::ir::{NodeId, ProcId, Supergraph};
use crate::solver::{Fact, IdeProblem};

/// `G_{p,d}`: the nodes of procedure `p` that fact `d` must visit.
///
/// Skipped nodes are never branches or gotos, so every skipped node falls
/// through to the next index, except skipped returns, which go to the
/// exit. The sparse successor of a dense node is therefore the first
/// retained node at or after it, or the exit if a skipped return comes
/// first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseCfg {
    pub proc: ProcId,
    pub fact: Fact,
    /// Sorted node indices.
    retained: Vec<u32>,
    /// Sorted returns that are not retained.
    skipped_returns: Vec<u32>,
}

impl SparseCfg {
    pub fn retained(&self) -> &[u32] {
        &self.retained
    }

    pub fn contains(&self, node: u32) -> bool {
        self.retained.binary_search(&node).is_ok()
    }

    /// The retained node reached first when falling through from `node`.
    pub fn first_at_or_after(&self, node: u32) -> u32 {
        let next = self.retained[self.retained.partition_point(|&r| r < node)];
        let i = self.skipped_returns.partition_point(|&r| r < node);
        match self.skipped_returns.get(i) {
            Some(&ret) if ret < next => *self.retained.last().expect("exit is retained"),
            _ => next,
        }
    }

    /// Sparse successors of any node of `p` (retained or not).
    pub fn next_use(&self, graph: &Supergraph, node: u32, out: &mut Vec<u32>) {
        let start = out.len();
        for &s in graph.cfg(self.proc).successors(node) {
            let t = self.first_at_or_after(s);
            if !out[start..].contains(&t) {
                out.push(t);
            }
        }
    }

    /// Sparse edges between retained nodes.
    pub fn edges(&self, graph: &Supergraph) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        let mut succ = Vec::new();
        for &n in &self.retained {
            succ.clear();
            self.next_use(graph, n, &mut succ);
            out.extend(succ.iter().map(|&s| (n, s)));
        }
        out
    }
}

/// Builds `G_{p,d}`: start and exit, every branch and goto, every
/// call when `d` is a heap symbol, and every node the problem reports as
/// relevant for `d`.
pub fn build_sparse_cfg<P: IdeProblem>(problem: &P, graph: &Supergraph, proc: ProcId, d: Fact) -> SparseCfg {
    let flow = graph.cfg(proc);
    let mut relevant = problem.relevant_nodes(graph, proc, d);
    if !relevant.is_sorted() {
        relevant.sort_unstable();
    }
    let mut retained = merge(&relevant, flow.control_nodes());
    if problem.is_heap(d) {
        retained = merge(&retained, flow.call_nodes());
    }
    let skipped_returns = flow
        .return_nodes()
        .iter()
        .copied()
        .filter(|r| retained.binary_search(r).is_err())
        .collect();
    SparseCfg {
        proc,
        fact: d,
        retained,
        skipped_returns,
    }
}

/// Union of two sorted lists, sorted and without duplicates.
fn merge(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => unreachable!(),
        };
        i += (a.get(i) == Some(&next)) as usize;
        j += (b.get(j) == Some(&next)) as usize;
        if out.last() != Some(&next) {
            out.push(next);
        }
    }
    out
}

/// Lazily built sparse CFGs, one per `(procedure, fact)`.
#[derive(Debug, Default)]
pub struct SparseCfgCache {
    cfgs: FxHashMap<(ProcId, Fact), SparseCfg>,
    built: usize,
    time: Duration,
}

impl SparseCfgCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get_or_build<P: IdeProblem>(&mut self, problem: &P, graph: &Supergraph, proc: ProcId, d: Fact) -> &SparseCfg {
        if !self.cfgs.contains_key(&(proc, d)) {
            let start = Instant::now();
            let cfg = build_sparse_cfg(problem, graph, proc, d);
            self.cfgs.insert((proc, d), cfg);
            self.built += 1;
            self.time += start.elapsed();
        }
        &self.cfgs[&(proc, d)]
    }

    pub fn get(&self, proc: ProcId, d: Fact) -> Option<&SparseCfg> {
        self.cfgs.get(&(proc, d))
    }

    /// `NextUse(p, d, n)`: the sparse successors of `n` in `G_{p,d}`.
    pub fn next_use<P: IdeProblem>(&mut self, problem: &P, graph: &Supergraph, node: NodeId, d: Fact, out: &mut Vec<NodeId>) {
        let cfg = self.get_or_build(problem, graph, node.proc, d);
        let start = out.len();
        for &s in graph.cfg(node.proc).successors(node.index) {
            let t = NodeId::new(node.proc, cfg.first_at_or_after(s));
            if !out[start..].contains(&t) {
                out.push(t);
            }
        }
    }

    /// Number of sparse CFGs constructed.
    pub fn count(&self) -> usize {
        self.built
    }

    pub fn construction_time(&self) -> Duration {
        self.time
    }

    pub fn iter(&self) -> impl Iterator<Item = &SparseCfg> {
        self.cfgs.values()
    }
}
