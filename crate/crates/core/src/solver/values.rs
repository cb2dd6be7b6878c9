use std::collections::VecDeque;

use rustc_hash::{FxHashMap, FxHashSet};

use super::{EdgeFunction, Fact, IdeProblem, JumpTable};
use crate::ir::{NodeId, ProcId, Supergraph};

/// Values per `(node, fact)`: the value on entry to the node. Missing
/// entries are `top`.
#[derive(Debug, Clone)]
pub struct ValueMap<V> {
    values: FxHashMap<(NodeId, Fact), V>,
    top: V,
}

impl<V: Clone + PartialEq> ValueMap<V> {
    pub fn new(top: V) -> Self {
        ValueMap {
            values: FxHashMap::default(),
            top,
        }
    }

    pub fn get(&self, node: NodeId, d: Fact) -> &V {
        self.values.get(&(node, d)).unwrap_or(&self.top)
    }

    pub fn contains(&self, node: NodeId, d: Fact) -> bool {
        self.values.contains_key(&(node, d))
    }

    pub fn insert(&mut self, node: NodeId, d: Fact, value: V) {
        self.values.insert((node, d), value);
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, Fact, &V)> {
        self.values.iter().map(|(&(n, d), v)| (n, d, v))
    }

    pub fn top(&self) -> &V {
        &self.top
    }
}

/// Looks up the value of `d` on entry to `node`; `top` when nothing reaches it.
pub fn query_value<V: Clone + PartialEq>(values: &ValueMap<V>, node: NodeId, d: Fact) -> V {
    values.get(node, d).clone()
}

/// Phase II.
///
/// First a fixpoint over procedure start values, seeded with
/// `val(s_entry, Λ) = ⊤` and pushed into callees through the call edge
/// functions; then every node value is the meet of its jump functions
/// applied to the corresponding start values.
pub fn compute_phase2<P: IdeProblem>(
    problem: &P,
    graph: &Supergraph,
    jump: &JumpTable<P::EdgeFn>,
) -> ValueMap<P::Value> {
    let top = problem.top();
    let mut start: FxHashMap<(ProcId, Fact), P::Value> = FxHashMap::default();
    let mut seen: FxHashSet<(ProcId, Fact)> = FxHashSet::default();
    let mut worklist = VecDeque::new();
    for &entry in graph.entries() {
        if seen.insert((entry, Fact::LAMBDA)) {
            start.insert((entry, Fact::LAMBDA), top.clone());
            worklist.push_back((entry, Fact::LAMBDA));
        }
    }

    let mut call_sites: FxHashMap<ProcId, Vec<NodeId>> = FxHashMap::default();
    for proc in graph.program().proc_ids() {
        let p = graph.procedure(proc);
        let calls = (1..p.exit())
            .map(|i| NodeId::new(proc, i))
            .filter(|&n| graph.call_site(n).is_some())
            .collect();
        call_sites.insert(proc, calls);
    }

    let mut flow = Vec::new();
    while let Some((proc, d1)) = worklist.pop_front() {
        let value = start.get(&(proc, d1)).cloned().unwrap_or_else(|| top.clone());
        for &call in &call_sites[&proc] {
            let site = *graph.call_site(call).expect("call site");
            for &d2 in jump.facts_at(call) {
                let Some(jf) = jump.get(d1, call, d2) else {
                    continue;
                };
                let at_call = jf.apply(&value);
                flow.clear();
                problem.call_flow(&site, d2, &mut flow);
                for (d3, f4) in flow.drain(..) {
                    let incoming = f4.apply(&at_call);
                    let key = (site.callee, d3);
                    let old = start.get(&key).cloned().unwrap_or_else(|| top.clone());
                    let merged = problem.meet_value(&old, &incoming);
                    let first = seen.insert(key);
                    if first || merged != old {
                        start.insert(key, merged);
                        worklist.push_back(key);
                    }
                }
            }
        }
    }

    let mut values = ValueMap::new(top.clone());
    for (node, d2) in jump.targets() {
        let mut acc = top.clone();
        for (d1, jf) in jump.sources(node, d2) {
            let sv = start.get(&(node.proc, d1)).unwrap_or(&top);
            acc = problem.meet_value(&acc, &jf.apply(sv));
        }
        values.insert(node, d2, acc);
    }
    values
}
