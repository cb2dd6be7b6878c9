use std::collections::VecDeque;
use std::time::Instant;

use rustc_hash::FxHashMap;

use super::tables::Update;
use super::{EdgeFunction, Fact, FlowOut, IdeProblem, JumpTable, Phase1, RunStats, SolverError, SummaryTable};
use crate::ir::{CallSite, NodeId, ProcId, Supergraph};

/// Where a fact goes after an intraprocedural node or over a call.
pub(crate) trait Successors<P: IdeProblem> {
    /// Targets for fact `d` produced by the call-to-return flow of `site`.
    fn after_call(&mut self, problem: &P, graph: &Supergraph, site: &CallSite, d: Fact, out: &mut Vec<NodeId>);
    /// Targets for fact `d` produced by the flow of `node`.
    fn after_node(&mut self, problem: &P, graph: &Supergraph, node: NodeId, d: Fact, out: &mut Vec<NodeId>);
}

/// Worklist tabulation of jump and summary functions.
pub(crate) struct Tabulator<'a, P: IdeProblem, S> {
    problem: &'a P,
    graph: &'a Supergraph,
    succ: &'a mut S,
    jump: JumpTable<P::EdgeFn>,
    summary: SummaryTable<P::EdgeFn>,
    /// `(callee, d3)` -> caller contexts `(c, d2)` that seeded `<s_callee, d3>`.
    incoming: FxHashMap<(ProcId, Fact), Vec<(NodeId, Fact)>>,
    worklist: VecDeque<(Fact, NodeId, Fact)>,
    stats: RunStats,
    height: u32,
}

impl<'a, P: IdeProblem, S: Successors<P>> Tabulator<'a, P, S> {
    pub(crate) fn new(problem: &'a P, graph: &'a Supergraph, succ: &'a mut S) -> Self {
        Tabulator {
            problem,
            graph,
            succ,
            jump: JumpTable::default(),
            summary: SummaryTable::default(),
            incoming: FxHashMap::default(),
            worklist: VecDeque::new(),
            stats: RunStats::default(),
            height: problem.chain_height() as u32,
        }
    }

    pub(crate) fn run(mut self) -> Result<Phase1<P::EdgeFn>, SolverError> {
        let start = Instant::now();
        for &entry in self.graph.entries() {
            let s = self.graph.start_of(entry);
            self.propagate(Fact::LAMBDA, s, Fact::LAMBDA, P::EdgeFn::identity())?;
        }
        let mut flow: FlowOut<P::EdgeFn> = Vec::new();
        let mut flow2: FlowOut<P::EdgeFn> = Vec::new();
        let mut targets: Vec<NodeId> = Vec::new();
        while let Some((d1, n, d2)) = self.worklist.pop_front() {
            let f = self
                .jump
                .get(d1, n, d2)
                .cloned()
                .expect("worklist items have jump functions");
            if let Some(site) = self.graph.call_site(n).copied() {
                self.process_call(&site, d1, d2, &f, &mut flow, &mut flow2, &mut targets)?;
            } else if self.graph.is_exit(n) {
                self.process_exit(n.proc, d1, d2, &f, &mut flow, &mut flow2)?;
            } else {
                flow.clear();
                self.problem.normal_flow(n, d2, &mut flow);
                for (d3, edge) in flow.drain(..) {
                    targets.clear();
                    self.succ.after_node(self.problem, self.graph, n, d3, &mut targets);
                    let composed = f.compose(&edge);
                    for &m in &targets {
                        self.propagate(d1, m, d3, composed.clone())?;
                    }
                }
            }
        }
        self.stats.phase1 = start.elapsed();
        self.stats.jump_entries = self.jump.len();
        self.stats.summary_entries = self.summary.len();
        Ok(Phase1 {
            jump: self.jump,
            summary: self.summary,
            stats: self.stats,
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn process_call(
        &mut self,
        site: &CallSite,
        d1: Fact,
        d2: Fact,
        f: &P::EdgeFn,
        flow: &mut FlowOut<P::EdgeFn>,
        flow2: &mut FlowOut<P::EdgeFn>,
        targets: &mut Vec<NodeId>,
    ) -> Result<(), SolverError> {
        let callee = site.callee;
        let callee_start = self.graph.start_of(callee);
        let callee_exit = self.graph.exit_of(callee);

        flow.clear();
        self.problem.call_flow(site, d2, flow);
        let seeds: Vec<_> = flow.drain(..).collect();
        for (d3, f4) in seeds {
            self.propagate(d3, callee_start, d3, P::EdgeFn::identity())?;
            let callers = self.incoming.entry((callee, d3)).or_default();
            if callers.contains(&(site.call, d2)) {
                continue;
            }
            callers.push((site.call, d2));
            // The callee may already be summarized for d3 from another context.
            let exits: Vec<Fact> = self.jump.exit_facts(callee, d3).to_vec();
            for de in exits {
                let fexit = self.jump.get(d3, callee_exit, de).cloned().expect("exit fact");
                flow2.clear();
                self.problem.return_flow(site, de, flow2);
                let returns: Vec<_> = flow2.drain(..).collect();
                for (d5, f5) in returns {
                    self.update_summary(site, d2, d5, f4.compose(&fexit).compose(&f5))?;
                }
            }
        }

        flow.clear();
        self.problem.call_to_return_flow(site, d2, flow);
        let passed: Vec<_> = flow.drain(..).collect();
        for (d3, edge) in passed {
            targets.clear();
            self.succ.after_call(self.problem, self.graph, site, d3, targets);
            let composed = f.compose(&edge);
            for &m in targets.iter() {
                self.propagate(d1, m, d3, composed.clone())?;
            }
        }

        let summaries: Vec<_> = self
            .summary
            .targets(site.call, d2)
            .map(|(d5, f3)| (d5, f3.clone()))
            .collect();
        for (d5, f3) in summaries {
            self.propagate(d1, site.return_site, d5, f.compose(&f3))?;
        }
        Ok(())
    }

    fn process_exit(
        &mut self,
        proc: ProcId,
        d1: Fact,
        d2: Fact,
        f: &P::EdgeFn,
        flow: &mut FlowOut<P::EdgeFn>,
        flow2: &mut FlowOut<P::EdgeFn>,
    ) -> Result<(), SolverError> {
        let Some(callers) = self.incoming.get(&(proc, d1)).cloned() else {
            return Ok(());
        };
        for (call, d4) in callers {
            let site = *self.graph.call_site(call).expect("call site");
            flow.clear();
            self.problem.call_flow(&site, d4, flow);
            let Some(f4) = flow
                .iter()
                .filter(|(d, _)| *d == d1)
                .map(|(_, e)| e.clone())
                .reduce(|a, b| a.meet(&b))
            else {
                continue;
            };
            flow2.clear();
            self.problem.return_flow(&site, d2, flow2);
            let returns: Vec<_> = flow2.drain(..).collect();
            for (d5, f5) in returns {
                self.update_summary(&site, d4, d5, f4.compose(f).compose(&f5))?;
            }
        }
        Ok(())
    }

    /// Meets `func` into `SummaryFn(<c, d4> -> <r, d5>)` and, on change,
    /// extends every jump function reaching `<c, d4>` to the return site.
    fn update_summary(&mut self, site: &CallSite, d4: Fact, d5: Fact, func: P::EdgeFn) -> Result<(), SolverError> {
        let merged = match self.summary.meet(site.call, d4, d5, func) {
            Update::Unchanged => return Ok(()),
            Update::Changed { func, changes } => {
                self.guard(changes, site.call, d4, d5)?;
                func
            }
        };
        let callers: Vec<_> = self
            .jump
            .sources(site.call, d4)
            .map(|(d3, f3)| (d3, f3.clone()))
            .collect();
        for (d3, f3) in callers {
            self.propagate(d3, site.return_site, d5, f3.compose(&merged))?;
        }
        Ok(())
    }

    fn propagate(&mut self, d1: Fact, node: NodeId, d2: Fact, func: P::EdgeFn) -> Result<(), SolverError> {
        let is_exit = self.graph.is_exit(node);
        match self.jump.meet(d1, node, d2, func, is_exit) {
            Update::Unchanged => Ok(()),
            Update::Changed { changes, .. } => {
                self.guard(changes, node, d1, d2)?;
                self.stats.propagations += 1;
                self.worklist.push_back((d1, node, d2));
                self.stats.peak_worklist = self.stats.peak_worklist.max(self.worklist.len());
                Ok(())
            }
        }
    }

    fn guard(&self, changes: u32, node: NodeId, d1: Fact, d2: Fact) -> Result<(), SolverError> {
        if changes > self.height {
            let program = self.graph.program();
            return Err(SolverError::ChainHeightExceeded {
                node: format!("{}:{}", program.procedure(node.proc).name, program.node_label(node)),
                d1: self.problem.fact_name(d1),
                d2: self.problem.fact_name(d2),
                height: self.height as usize,
            });
        }
        Ok(())
    }
}
