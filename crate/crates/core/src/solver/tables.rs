use rustc_hash::FxHashMap;

use super::{EdgeFunction, Fact};
use crate::ir::{NodeId, ProcId};

#[derive(Debug, Clone)]
struct Entry<F> {
    source: Fact,
    func: F,
    changes: u32,
}

/// Jump functions `<s_p, d1> -> <n, d2>`, indexed by the target `(n, d2)`.
/// Absent entries mean `λl.⊤`.
#[derive(Debug, Clone)]
pub struct JumpTable<F> {
    by_target: FxHashMap<(NodeId, Fact), Vec<Entry<F>>>,
    facts_at: FxHashMap<NodeId, Vec<Fact>>,
    exit_facts: FxHashMap<(ProcId, Fact), Vec<Fact>>,
    len: usize,
}

/// Outcome of meeting a new function into a table slot.
pub(crate) enum Update<F> {
    Unchanged,
    Changed { func: F, changes: u32 },
}

impl<F: EdgeFunction> Default for JumpTable<F> {
    fn default() -> Self {
        JumpTable {
            by_target: FxHashMap::default(),
            facts_at: FxHashMap::default(),
            exit_facts: FxHashMap::default(),
            len: 0,
        }
    }
}

fn meet_into<F: EdgeFunction>(slot: &mut Vec<Entry<F>>, source: Fact, func: F) -> Update<F> {
    match slot.iter_mut().find(|e| e.source == source) {
        Some(entry) => {
            let merged = func.meet(&entry.func);
            if merged == entry.func {
                return Update::Unchanged;
            }
            debug_assert_eq!(merged.meet(&entry.func), merged, "table entries only move down");
            entry.func = merged.clone();
            entry.changes += 1;
            Update::Changed {
                func: merged,
                changes: entry.changes,
            }
        }
        None => {
            if func.is_all_top() {
                return Update::Unchanged;
            }
            slot.push(Entry {
                source,
                func: func.clone(),
                changes: 1,
            });
            Update::Changed { func, changes: 1 }
        }
    }
}

impl<F: EdgeFunction> JumpTable<F> {
    pub fn get(&self, d1: Fact, node: NodeId, d2: Fact) -> Option<&F> {
        self.by_target
            .get(&(node, d2))?
            .iter()
            .find(|e| e.source == d1)
            .map(|e| &e.func)
    }

    /// Jump functions into `(node, d2)` as `(d1, f)` pairs.
    pub fn sources(&self, node: NodeId, d2: Fact) -> impl Iterator<Item = (Fact, &F)> {
        self.by_target
            .get(&(node, d2))
            .into_iter()
            .flatten()
            .map(|e| (e.source, &e.func))
    }

    /// Facts with at least one jump function into `node`.
    pub fn facts_at(&self, node: NodeId) -> &[Fact] {
        self.facts_at.get(&node).map_or(&[], Vec::as_slice)
    }

    /// Facts at the exit of `proc` reached from `<s_proc, d1>`.
    pub(crate) fn exit_facts(&self, proc: ProcId, d1: Fact) -> &[Fact] {
        self.exit_facts.get(&(proc, d1)).map_or(&[], Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Every entry as `(d1, n, d2, f)`, in no particular order.
    pub fn iter(&self) -> impl Iterator<Item = (Fact, NodeId, Fact, &F)> {
        self.by_target
            .iter()
            .flat_map(|(&(n, d2), entries)| entries.iter().map(move |e| (e.source, n, d2, &e.func)))
    }

    pub(crate) fn targets(&self) -> impl Iterator<Item = (NodeId, Fact)> + '_ {
        self.by_target.keys().copied()
    }

    pub(crate) fn meet(&mut self, d1: Fact, node: NodeId, d2: Fact, func: F, is_exit: bool) -> Update<F> {
        let slot = self.by_target.entry((node, d2)).or_default();
        let fresh_target = slot.is_empty();
        let before = slot.len();
        let update = meet_into(slot, d1, func);
        if slot.len() > before {
            self.len += 1;
            if fresh_target {
                self.facts_at.entry(node).or_default().push(d2);
            }
            if is_exit {
                self.exit_facts.entry((node.proc, d1)).or_default().push(d2);
            }
        }
        update
    }
}

/// Summary functions `<c, d4> -> <r, d5>`, keyed by the call node.
#[derive(Debug, Clone)]
pub struct SummaryTable<F> {
    by_call: FxHashMap<(NodeId, Fact), Vec<Entry<F>>>,
    len: usize,
}

impl<F: EdgeFunction> Default for SummaryTable<F> {
    fn default() -> Self {
        SummaryTable {
            by_call: FxHashMap::default(),
            len: 0,
        }
    }
}

impl<F: EdgeFunction> SummaryTable<F> {
    pub fn get(&self, call: NodeId, d4: Fact, d5: Fact) -> Option<&F> {
        self.by_call
            .get(&(call, d4))?
            .iter()
            .find(|e| e.source == d5)
            .map(|e| &e.func)
    }

    /// Summaries out of `(call, d4)` as `(d5, f)` pairs.
    pub fn targets(&self, call: NodeId, d4: Fact) -> impl Iterator<Item = (Fact, &F)> {
        self.by_call
            .get(&(call, d4))
            .into_iter()
            .flatten()
            .map(|e| (e.source, &e.func))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, Fact, Fact, &F)> {
        self.by_call
            .iter()
            .flat_map(|(&(c, d4), entries)| entries.iter().map(move |e| (c, d4, e.source, &e.func)))
    }

    pub(crate) fn meet(&mut self, call: NodeId, d4: Fact, d5: Fact, func: F) -> Update<F> {
        let slot = self.by_call.entry((call, d4)).or_default();
        let before = slot.len();
        // Entries here are keyed by d5; `source` holds the target fact.
        let update = meet_into(slot, d5, func);
        if slot.len() > before {
            self.len += 1;
        }
        update
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::ProcId;
    use crate::lcp::LcpEdge;

    fn changed(u: Update<LcpEdge>) -> Option<LcpEdge> {
        match u {
            Update::Unchanged => None,
            Update::Changed { func, .. } => Some(func),
        }
    }

    #[test]
    fn propagate_meets() {
        let mut t = JumpTable::<LcpEdge>::default();
        let n = NodeId::new(ProcId(0), 1);
        let (d1, d2) = (Fact::LAMBDA, Fact(1));
        assert_eq!(changed(t.meet(d1, n, d2, LcpEdge::Constant(3), false)), Some(LcpEdge::Constant(3)));
        assert_eq!(t.get(d1, n, d2), Some(&LcpEdge::Constant(3)));
        assert_eq!(changed(t.meet(d1, n, d2, LcpEdge::Constant(3), false)), None);
        assert_eq!(changed(t.meet(d1, n, d2, LcpEdge::Constant(4), false)), Some(LcpEdge::AllBottom));
        assert_eq!(t.get(d1, n, d2), Some(&LcpEdge::AllBottom));
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn all_top_is_not_stored() {
        let mut t = JumpTable::<LcpEdge>::default();
        let n = NodeId::new(ProcId(0), 1);
        assert!(changed(t.meet(Fact::LAMBDA, n, Fact(2), LcpEdge::AllTop, false)).is_none());
        assert!(t.is_empty());
        assert!(t.get(Fact::LAMBDA, n, Fact(2)).is_none());
    }

    #[test]
    fn exit_index() {
        let mut t = JumpTable::<LcpEdge>::default();
        let exit = NodeId::new(ProcId(3), 5);
        t.meet(Fact(1), exit, Fact(2), LcpEdge::Identity, true);
        t.meet(Fact(1), exit, Fact(2), LcpEdge::Constant(1), true);
        assert_eq!(t.exit_facts(ProcId(3), Fact(1)), &[Fact(2)]);
        assert_eq!(t.facts_at(exit), &[Fact(2)]);
    }
}
