//! Taint tracking as a reachability client on the same fact space.
//!
//! A value is either `⊤` (no taint reaches) or `⊥` (tainted). Constant
//! assignments are the sources; the only edge functions are `λl.⊤`,
//! identity and `λl.⊥`.

use super::edge::LcpEdge;
use super::problem::LcpProblem;
use crate::ir::{CallSite, NodeId, ProcId, Supergraph};
use crate::lattice::LatticeValue;
use crate::solver::{identity_flow_into, Fact, FlowOut, IdeProblem};

pub struct TaintProblem {
    lcp: LcpProblem,
}

pub fn taint_problem(graph: &Supergraph) -> TaintProblem {
    TaintProblem::new(graph)
}

impl TaintProblem {
    pub fn new(graph: &Supergraph) -> TaintProblem {
        TaintProblem {
            lcp: LcpProblem::new(graph),
        }
    }

    /// The underlying symbol table and flow functions.
    pub fn facts(&self) -> &LcpProblem {
        &self.lcp
    }
}

fn reachability(d: Fact, out: &mut FlowOut<LcpEdge>) {
    for (target, edge) in out.iter_mut() {
        *edge = if d.is_lambda() && !target.is_lambda() {
            LcpEdge::AllBottom
        } else {
            LcpEdge::Identity
        };
    }
}

impl IdeProblem for TaintProblem {
    type Value = LatticeValue;
    type EdgeFn = LcpEdge;

    fn top(&self) -> LatticeValue {
        LatticeValue::Top
    }

    fn bottom(&self) -> LatticeValue {
        LatticeValue::Bottom
    }

    fn meet_value(&self, a: &LatticeValue, b: &LatticeValue) -> LatticeValue {
        a.meet(*b)
    }

    fn chain_height(&self) -> usize {
        2
    }

    fn normal_flow(&self, node: NodeId, d: Fact, out: &mut FlowOut<LcpEdge>) {
        let start = out.len();
        self.lcp.normal_flow(node, d, out);
        // A source adds taint; it never clears it.
        if self.lcp.is_const_assign_target(node, d) && !out[start..].iter().any(|(f, _)| *f == d) {
            out.push((d, LcpEdge::Identity));
        }
        let mut tail = out.split_off(start);
        reachability(d, &mut tail);
        out.append(&mut tail);
    }

    fn call_flow(&self, site: &CallSite, d: Fact, out: &mut FlowOut<LcpEdge>) {
        self.lcp.call_flow(site, d, out);
    }

    fn return_flow(&self, site: &CallSite, d: Fact, out: &mut FlowOut<LcpEdge>) {
        self.lcp.return_flow(site, d, out);
    }

    fn call_to_return_flow(&self, site: &CallSite, d: Fact, out: &mut FlowOut<LcpEdge>) {
        self.lcp.call_to_return_flow(site, d, out);
    }

    fn is_heap(&self, d: Fact) -> bool {
        self.lcp.is_heap(d)
    }

    fn fact_name(&self, d: Fact) -> String {
        self.lcp.fact_name(d)
    }

    // With only reachability values, a node that maps `d` to exactly `{d}`
    // with identity also leaves its value untouched.
    fn is_identity_transformer(&self, graph: &Supergraph, node: NodeId, d: Fact) -> bool {
        self.is_identity_flow(graph, node, d)
    }

    fn relevant_nodes(&self, graph: &Supergraph, proc: ProcId, d: Fact) -> Vec<u32> {
        let mut buf = Vec::new();
        self.lcp
            .candidates(proc, d)
            .iter()
            .copied()
            .filter(|&i| {
                let node = NodeId::new(proc, i);
                // Taint rows at an assignment only differ from the constant
                // rows where a source re-taints its target.
                if self.lcp.is_assignment(node) {
                    return !(self.lcp.flows_only_to_self(node, d) || self.lcp.is_const_assign_target(node, d));
                }
                !identity_flow_into(self, graph, node, d, &mut buf)
            })
            .collect()
    }
}
