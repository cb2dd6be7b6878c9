use crate::ir::{NodeId, ProcId, Supergraph};
use crate::solver::{EdgeFunction, Fact, IdeProblem, ValueMap};

use super::{SparseCfg, SparseSolution};

/// Value of `d` on exit from `m`, rebuilt from the facts that reached `m`
/// and the flow (and summary) functions there. With `others_only`, `d`'s
/// own entry at `m` is ignored: at a node skipped for `d` that entry is at
/// most a partial view of `d`, while other facts may still generate it
/// (a taint source for an already tainted symbol, for example).
fn out_value<P: IdeProblem>(
    problem: &P,
    graph: &Supergraph,
    sol: &SparseSolution<P>,
    m: NodeId,
    d: Fact,
    others_only: bool,
) -> P::Value {
    let mut acc = problem.top();
    let mut flow = Vec::new();
    for &d2 in sol.phase1.jump.facts_at(m) {
        if others_only && d2 == d {
            continue;
        }
        let v = sol.values.get(m, d2);
        flow.clear();
        match graph.call_site(m) {
            Some(site) => {
                problem.call_to_return_flow(site, d2, &mut flow);
                for (d5, f3) in sol.phase1.summary.targets(m, d2) {
                    if d5 == d {
                        acc = problem.meet_value(&acc, &f3.apply(v));
                    }
                }
            }
            None => problem.normal_flow(m, d2, &mut flow),
        }
        for (d3, edge) in &flow {
            if *d3 == d {
                acc = problem.meet_value(&acc, &edge.apply(v));
            }
        }
    }
    acc
}

/// Value of `d` on entry to a node skipped by `cfg`. Every non-retained
/// predecessor of a skipped node is the node just before it, so this walks
/// backwards through the straight-line run and meets the contributions of
/// all retained predecessors (and generators of `d`) found on the way.
fn skipped_value<P: IdeProblem>(
    problem: &P,
    graph: &Supergraph,
    sol: &SparseSolution<P>,
    cfg: &SparseCfg,
    node: NodeId,
    d: Fact,
) -> P::Value {
    let flow = graph.cfg(node.proc);
    let mut acc = problem.top();
    let mut cur = node.index;
    loop {
        let mut next = None;
        for &pred in flow.predecessors(cur) {
            let retained = cfg.contains(pred);
            let contrib = out_value(problem, graph, sol, NodeId::new(node.proc, pred), d, !retained);
            acc = problem.meet_value(&acc, &contrib);
            if !retained {
                debug_assert_eq!(pred + 1, cur);
                next = Some(pred);
            }
        }
        match next {
            Some(p) => cur = p,
            None => return acc,
        }
    }
}

/// Value of `d` on entry to `node` after a sparse run, also at nodes that
/// `G_{p,d}` skipped.
pub fn resolve_value_at<P: IdeProblem>(
    problem: &P,
    graph: &Supergraph,
    sol: &mut SparseSolution<P>,
    node: NodeId,
    d: Fact,
) -> P::Value {
    if d.is_lambda() {
        return sol.values.get(node, d).clone();
    }
    let cfg = sol.cache.get_or_build(problem, graph, node.proc, d).clone();
    if cfg.contains(node.index) {
        return sol.values.get(node, d).clone();
    }
    skipped_value(problem, graph, sol, &cfg, node, d)
}

/// Values of `d` at every node of `proc` in one forward sweep.
fn sweep<P: IdeProblem>(
    problem: &P,
    graph: &Supergraph,
    sol: &SparseSolution<P>,
    cfg: &SparseCfg,
    proc: ProcId,
    d: Fact,
) -> Vec<P::Value> {
    let flow = graph.cfg(proc);
    let mut values: Vec<P::Value> = Vec::with_capacity(flow.node_count());
    for i in 0..flow.node_count() as u32 {
        let node = NodeId::new(proc, i);
        let v = if cfg.contains(i) {
            sol.values.get(node, d).clone()
        } else {
            let mut acc = problem.top();
            for &pred in flow.predecessors(i) {
                let pred_node = NodeId::new(proc, pred);
                let contrib = if cfg.contains(pred) {
                    out_value(problem, graph, sol, pred_node, d, false)
                } else {
                    let generated = out_value(problem, graph, sol, pred_node, d, true);
                    problem.meet_value(&values[pred as usize], &generated)
                };
                acc = problem.meet_value(&acc, &contrib);
            }
            acc
        };
        values.push(v);
    }
    values
}

/// A dense-shaped value map from a sparse run: every node of every
/// procedure where a fact was tabulated gets a value for that fact.
/// Entries equal to `top` are left out, matching the dense map.
pub fn materialize<P: IdeProblem>(problem: &P, graph: &Supergraph, sol: &mut SparseSolution<P>) -> ValueMap<P::Value> {
    let mut keys: Vec<(ProcId, Fact)> = sol
        .phase1
        .jump
        .targets()
        .filter(|(_, d)| !d.is_lambda())
        .map(|(n, d)| (n.proc, d))
        .collect();
    keys.sort_unstable();
    keys.dedup();
    let top = problem.top();
    let mut out = ValueMap::new(top.clone());
    for (proc, d) in keys {
        let cfg = sol.cache.get_or_build(problem, graph, proc, d).clone();
        for (i, v) in sweep(problem, graph, sol, &cfg, proc, d).into_iter().enumerate() {
            if v != top {
                out.insert(NodeId::new(proc, i as u32), d, v);
            }
        }
    }
    out
}
