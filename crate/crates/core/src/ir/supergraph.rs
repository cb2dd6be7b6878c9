use super::{Cfg, IrError, NodeId, ProcId, Procedure, Program, StmtKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CallSite {
    pub call: NodeId,
    pub callee: ProcId,
    pub return_site: NodeId,
}

/// The interprocedural CFG: per-procedure CFGs plus call, return and
/// call-to-return edges for every call statement.
#[derive(Debug, Clone)]
pub struct Supergraph {
    program: Program,
    cfgs: Vec<Cfg>,
    entries: Vec<ProcId>,
    /// Per procedure, the call site at each node index.
    call_sites: Vec<Vec<Option<CallSite>>>,
    call_count: usize,
    callers: Vec<Vec<CallSite>>,
    reachable: Vec<bool>,
}

pub fn build_supergraph(program: Program, entries: &[&str]) -> Result<Supergraph, IrError> {
    Supergraph::new(program, entries)
}

impl Supergraph {
    pub fn new(program: Program, entries: &[&str]) -> Result<Self, IrError> {
        if entries.is_empty() {
            return Err(IrError::NoEntries);
        }
        let entries = entries
            .iter()
            .map(|&name| program.proc_id(name).ok_or_else(|| IrError::UnknownEntry(name.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        let cfgs: Vec<Cfg> = program.procedures.iter().map(Cfg::build).collect();
        let mut call_sites: Vec<Vec<Option<CallSite>>> =
            program.procedures.iter().map(|p| vec![None; p.node_count()]).collect();
        let mut call_count = 0;
        let mut callers = vec![Vec::new(); program.procedures.len()];
        for pid in program.proc_ids() {
            for (i, stmt) in program.procedure(pid).body.iter().enumerate() {
                if let StmtKind::Call { callee, .. } = &stmt.kind {
                    let callee = program.proc_id(callee).expect("callees resolved by the parser");
                    let index = i as u32 + 1;
                    // A call never ends a body (an implicit return follows), so index + 1 exists.
                    let site = CallSite {
                        call: NodeId::new(pid, index),
                        callee,
                        return_site: NodeId::new(pid, index + 1),
                    };
                    call_sites[pid.0 as usize][index as usize] = Some(site);
                    call_count += 1;
                    callers[callee.0 as usize].push(site);
                }
            }
        }
        let mut reachable = vec![false; program.procedures.len()];
        let mut stack = entries.clone();
        for e in &entries {
            reachable[e.0 as usize] = true;
        }
        while let Some(p) = stack.pop() {
            for stmt in &program.procedure(p).body {
                if let StmtKind::Call { callee, .. } = &stmt.kind {
                    let q = program.proc_id(callee).expect("resolved");
                    if !reachable[q.0 as usize] {
                        reachable[q.0 as usize] = true;
                        stack.push(q);
                    }
                }
            }
        }
        Ok(Supergraph {
            program,
            cfgs,
            entries,
            call_sites,
            call_count,
            callers,
            reachable,
        })
    }

    pub fn program(&self) -> &Program {
        &self.program
    }

    pub fn procedure(&self, id: ProcId) -> &Procedure {
        self.program.procedure(id)
    }

    pub fn cfg(&self, id: ProcId) -> &Cfg {
        &self.cfgs[id.0 as usize]
    }

    pub fn entries(&self) -> &[ProcId] {
        &self.entries
    }

    pub fn start_of(&self, proc: ProcId) -> NodeId {
        NodeId::new(proc, Procedure::START)
    }

    pub fn exit_of(&self, proc: ProcId) -> NodeId {
        NodeId::new(proc, self.procedure(proc).exit())
    }

    pub fn is_exit(&self, node: NodeId) -> bool {
        node.index == self.procedure(node.proc).exit()
    }

    pub fn call_site(&self, node: NodeId) -> Option<&CallSite> {
        self.call_sites[node.proc.0 as usize].get(node.index as usize)?.as_ref()
    }

    /// Call sites whose callee is `proc`, each paired with its return site.
    pub fn callers(&self, proc: ProcId) -> &[CallSite] {
        &self.callers[proc.0 as usize]
    }

    pub fn successors(&self, node: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.cfg(node.proc)
            .successors(node.index)
            .iter()
            .map(move |&i| NodeId::new(node.proc, i))
    }

    /// Procedures transitively callable from an entry. Others stay in the
    /// graph but are never analyzed.
    pub fn is_reachable(&self, proc: ProcId) -> bool {
        self.reachable[proc.0 as usize]
    }

    pub fn call_edge_count(&self) -> usize {
        self.call_count
    }
}
