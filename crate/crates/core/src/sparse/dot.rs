use std::fmt::{Display, Write};

use crate::ir::Supergraph;
use crate::solver::{IdeProblem, JumpTable};

use super::SparseCfg;

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn node_text(graph: &Supergraph, cfg: &SparseCfg, i: u32) -> String {
    let proc = graph.procedure(cfg.proc);
    match proc.stmt(i) {
        Some(stmt) => format!("{i}: {}", stmt.kind),
        None if i == 0 => "start".to_string(),
        None => "exit".to_string(),
    }
}

/// Graphviz rendering of one sparse CFG.
pub fn sparse_cfg_dot<P: IdeProblem>(problem: &P, graph: &Supergraph, cfg: &SparseCfg) -> String {
    let proc = graph.procedure(cfg.proc);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "digraph \"{}\" {{",
        escape(&format!("{} / {}", proc.name, problem.fact_name(cfg.fact)))
    );
    for &n in cfg.retained() {
        let _ = writeln!(out, "  n{n} [label=\"{}\"];", escape(&node_text(graph, cfg, n)));
    }
    for (a, b) in cfg.edges(graph) {
        let _ = writeln!(out, "  n{a} -> n{b};");
    }
    out.push_str("}\n");
    out
}

/// Graphviz rendering of all jump functions, one edge per
/// `<s_p, d1> -> <n, d2>` labelled with its edge function.
pub fn jump_table_dot<P: IdeProblem>(problem: &P, graph: &Supergraph, jump: &JumpTable<P::EdgeFn>) -> String
where
    P::EdgeFn: Display,
{
    let program = graph.program();
    let mut entries: Vec<_> = jump.iter().collect();
    entries.sort_by_key(|&(d1, n, d2, _)| (n, d1, d2));
    let mut out = String::from("digraph path_edges {\n");
    for (d1, n, d2, f) in entries {
        let proc = &program.procedure(n.proc).name;
        let src = format!("{proc}:start:{}", problem.fact_name(d1));
        let dst = format!("{proc}:{}:{}", program.node_label(n), problem.fact_name(d2));
        let _ = writeln!(
            out,
            "  \"{}\" -> \"{}\" [label=\"{}\"];",
            escape(&src),
            escape(&dst),
            escape(&f.to_string())
        );
    }
    out.push_str("}\n");
    out
}
