use super::{Procedure, StmtKind};

/// Intraprocedural control-flow graph over node indices of one procedure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cfg {
    succs: Vec<Vec<u32>>,
    preds: Vec<Vec<u32>>,
    reachable: Vec<bool>,
    /// Start, branches, gotos and exit, in node order.
    control: Vec<u32>,
    calls: Vec<u32>,
    returns: Vec<u32>,
}

impl Cfg {
    /// Fallthrough, goto and branch edges; every return flows to the exit node.
    pub fn build(proc: &Procedure) -> Cfg {
        let n = proc.node_count();
        let exit = proc.exit();
        let mut succs = vec![Vec::new(); n];
        succs[0].push(1);
        let mut control = vec![0];
        let mut calls = Vec::new();
        let mut returns = Vec::new();
        for (i, stmt) in proc.body.iter().enumerate() {
            let node = i + 1;
            let next = node as u32 + 1;
            let label = |l: &String| proc.label_node(l).expect("labels resolved by the parser");
            match &stmt.kind {
                StmtKind::Branch { .. } | StmtKind::Goto { .. } => control.push(node as u32),
                StmtKind::Call { .. } => calls.push(node as u32),
                StmtKind::Return { .. } => returns.push(node as u32),
                _ => {}
            }
            succs[node] = match &stmt.kind {
                StmtKind::Return { .. } => vec![exit],
                StmtKind::Goto { label: l } => vec![label(l)],
                StmtKind::Branch { label: l, .. } => {
                    let target = label(l);
                    if target == next {
                        vec![next]
                    } else {
                        vec![next, target]
                    }
                }
                _ => vec![next],
            };
        }
        control.push(exit);
        let mut preds = vec![Vec::new(); n];
        for (from, targets) in succs.iter().enumerate() {
            for &to in targets {
                preds[to as usize].push(from as u32);
            }
        }
        let mut reachable = vec![false; n];
        let mut stack = vec![0u32];
        reachable[0] = true;
        while let Some(node) = stack.pop() {
            for &s in &succs[node as usize] {
                if !reachable[s as usize] {
                    reachable[s as usize] = true;
                    stack.push(s);
                }
            }
        }
        Cfg {
            succs,
            preds,
            reachable,
            control,
            calls,
            returns,
        }
    }

    pub fn successors(&self, node: u32) -> &[u32] {
        &self.succs[node as usize]
    }

    pub fn predecessors(&self, node: u32) -> &[u32] {
        &self.preds[node as usize]
    }

    /// Start, exit and every branch and goto, sorted.
    pub fn control_nodes(&self) -> &[u32] {
        &self.control
    }

    /// Call nodes, sorted.
    pub fn call_nodes(&self) -> &[u32] {
        &self.calls
    }

    /// Return nodes, sorted.
    pub fn return_nodes(&self) -> &[u32] {
        &self.returns
    }

    pub fn node_count(&self) -> usize {
        self.succs.len()
    }

    /// Nodes not reachable from the start node.
    pub fn is_dead(&self, node: u32) -> bool {
        !self.reachable[node as usize]
    }

    /// True when some edge leads back to an earlier or equal node index.
    pub fn has_back_edge(&self) -> bool {
        self.succs
            .iter()
            .enumerate()
            .any(|(from, targets)| targets.iter().any(|&to| (to as usize) <= from))
    }
}
