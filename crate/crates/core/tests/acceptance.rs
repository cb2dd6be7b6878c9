//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use sparse_ide::analysis::{run, Client, Mode, Run};
use sparse_ide::bench::{compare_runs, corpus, generate_program, oracle_interpret, Category, GeneratorParams, OracleError};
use sparse_ide::ir::{parse_program, NodeId, Place, Supergraph};
use sparse_ide::lattice::LatticeValue;
use sparse_ide::lcp::{apply, compose, meet_edge, LcpEdge, LcpProblem, TaintProblem};
use sparse_ide::solver::SolverError;
use sparse_ide::sparse::build_sparse_cfg;

type Outcome = Result<String, String>;

fn graph_of(program: sparse_ide::ir::Program) -> Supergraph {
    Supergraph::new(program, &["main"]).expect("main exists")
}

fn generated(procs: usize, stmts: usize, rho: f64) -> Supergraph {
    let params = GeneratorParams {
        procs,
        stmts_per_proc: stmts,
        rho,
        ..GeneratorParams::default()
    };
    graph_of(generate_program(&params).expect("valid params"))
}

fn corpus_equivalence() -> Outcome {
    let start = Instant::now();
    let cases = corpus();
    let missing: Vec<_> = Category::ALL
        .iter()
        .filter(|c| !cases.iter().any(|case| case.category == **c))
        .collect();
    if cases.len() < 40 || !missing.is_empty() {
        return Err(format!("{} cases, missing categories {missing:?}", cases.len()));
    }
    for case in cases {
        let graph = graph_of(case.program().map_err(|e| format!("{}: {e}", case.id()))?);
        let cmp = compare_runs(&graph, Client::Lcp, 1).map_err(|e| format!("{}: {e}", case.id()))?;
        if let Some(m) = cmp.mismatches.first() {
            return Err(format!("{}: {} differ ({} vs {})", case.id(), m.symbol, m.left, m.right));
        }
    }
    let elapsed = start.elapsed();
    if elapsed >= Duration::from_secs(10) {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!("{} cases identical in {:.2?}", cases.len(), elapsed))
}

fn compare_with_oracle(id: &str, run: &Run, oracle: &sparse_ide::bench::OracleValues) -> Result<(), String> {
    for ((node, place), want) in oracle {
        let got = run.value_at(*node, place);
        if got != *want {
            return Err(format!("{id} {}: node {} {place}: {got} vs oracle {want}", run.mode, node.index));
        }
    }
    for ((node, sym), got) in run.symbolic() {
        let place = sym.place().expect("no lambda in symbolic values");
        let want = oracle.get(&(node, place.clone())).copied().unwrap_or(LatticeValue::Top);
        if got != want {
            return Err(format!("{id} {}: node {} {place}: {got} vs oracle {want}", run.mode, node.index));
        }
    }
    Ok(())
}

fn oracle_equivalence() -> Outcome {
    let mut checked = 0;
    for case in corpus() {
        let program = case.program().map_err(|e| e.to_string())?;
        if program.procedures.len() != 1 {
            continue;
        }
        let oracle = match oracle_interpret(&program, "main", 4) {
            Ok(v) => v,
            Err(OracleError::Loop(_)) => continue,
            Err(e) => return Err(format!("{}: {e}", case.id())),
        };
        let graph = graph_of(program);
        for mode in [Mode::Dense, Mode::Sparse] {
            let r = run(&graph, Client::Lcp, mode).map_err(|e| e.to_string())?;
            compare_with_oracle(&case.id(), &r, &oracle)?;
        }
        checked += 1;
    }
    if checked == 0 {
        return Err("no loop-free single-procedure cases".into());
    }
    Ok(format!("{checked} loop-free single-procedure cases match exactly"))
}

fn edge() -> impl Strategy<Value = LcpEdge> {
    let small = -1000i64..1000;
    prop_oneof![
        Just(LcpEdge::AllTop),
        Just(LcpEdge::AllBottom),
        Just(LcpEdge::Identity),
        small.clone().prop_map(LcpEdge::Constant),
        (small.clone(), small.clone()).prop_map(|(m, b)| LcpEdge::linear(m, b)),
        small.prop_map(LcpEdge::div),
    ]
}

fn value() -> impl Strategy<Value = LatticeValue> {
    prop_oneof![
        Just(LatticeValue::Top),
        Just(LatticeValue::Bottom),
        (-1000i64..1000).prop_map(LatticeValue::Const),
    ]
}

fn leq(a: LatticeValue, b: LatticeValue) -> bool {
    a.meet(b) == a
}

/// Compositions the family cannot express fall back to `λl.⊥`.
fn representable(f: LcpEdge, g: LcpEdge) -> bool {
    use LcpEdge::{Div, Linear};
    !matches!((f, g), (Linear { .. } | Div(_), Div(_)) | (Div(_), Linear { .. }))
}

fn edge_algebra() -> Outcome {
    const TRIALS: u32 = 10_000;
    let mut runner = TestRunner::new(Config {
        cases: TRIALS,
        failure_persistence: None,
        ..Config::default()
    });
    let check = |ok: bool, what: String| if ok { Ok(()) } else { Err(TestCaseError::fail(what)) };

    runner
        .run(&(edge(), edge(), value()), |(f, g, l)| {
            let composed = apply(&compose(&f, &g), l);
            let stepwise = apply(&g, apply(&f, l));
            if representable(f, g) {
                check(composed == stepwise, format!("({f}) then ({g}) on {l}: {composed} vs {stepwise}"))
            } else {
                check(leq(composed, stepwise), format!("unsound ({f}) then ({g}) on {l}"))
            }
        })
        .map_err(|e| format!("composition: {e}"))?;

    runner
        .run(&(edge(), edge(), value()), |(f, g, l)| {
            let met = apply(&meet_edge(&f, &g), l);
            let pointwise = apply(&f, l).meet(apply(&g, l));
            check(leq(met, pointwise), format!("meet of {f} and {g} on {l}: {met} above {pointwise}"))?;
            check(meet_edge(&f, &g) == meet_edge(&g, &f), "edge meet not commutative".into())?;
            check(meet_edge(&f, &f) == f, "edge meet not idempotent".into())?;
            check(meet_edge(&f, &LcpEdge::AllTop) == f, "λl.⊤ not neutral".into())?;
            check(compose(&LcpEdge::Identity, &f) == f && compose(&f, &LcpEdge::Identity) == f, "identity".into())
        })
        .map_err(|e| format!("meet: {e}"))?;

    runner
        .run(&(value(), value(), value(), edge(), edge(), edge()), |(a, b, c, f, g, h)| {
            check(a.meet(b) == b.meet(a), "value meet not commutative".into())?;
            check(a.meet(b).meet(c) == a.meet(b.meet(c)), "value meet not associative".into())?;
            check(a.meet(a) == a, "value meet not idempotent".into())?;
            check(a.meet(LatticeValue::Top) == a, "⊤ not neutral".into())?;
            check(a.meet(LatticeValue::Bottom) == LatticeValue::Bottom, "⊥ not absorbing".into())?;
            check(
                meet_edge(&meet_edge(&f, &g), &h) == meet_edge(&f, &meet_edge(&g, &h)),
                "edge meet not associative".into(),
            )?;
            // Monotone: a ⊑ b implies f(a) ⊑ f(b).
            let lo = a.meet(b);
            check(leq(apply(&f, lo), apply(&f, b)), format!("{f} not monotone"))
        })
        .map_err(|e| format!("lattice: {e}"))?;

    Ok(format!("3 properties x {TRIALS} trials"))
}

fn work_reduction() -> Outcome {
    let mut inputs: Vec<(String, Supergraph)> = Vec::new();
    for case in corpus() {
        inputs.push((case.id(), graph_of(case.program().map_err(|e| e.to_string())?)));
    }
    for (procs, stmts, rho) in [(5, 80, 0.3), (8, 150, 0.7), (3, 400, 1.0)] {
        inputs.push((format!("gen({procs}x{stmts},{rho})"), generated(procs, stmts, rho)));
    }
    for (name, graph) in &inputs {
        for client in [Client::Lcp, Client::Taint] {
            let cmp = compare_runs(graph, client, 1).map_err(|e| e.to_string())?;
            if cmp.sparse.stats.propagations > cmp.dense.stats.propagations {
                return Err(format!(
                    "{name} {client}: sparse {} > dense {}",
                    cmp.sparse.stats.propagations, cmp.dense.stats.propagations
                ));
            }
        }
    }

    let mut ratios = Vec::new();
    for rho in [0.0, 0.5, 0.9, 0.95, 0.99] {
        let cmp = compare_runs(&generated(10, 1000, rho), Client::Lcp, 1).map_err(|e| e.to_string())?;
        if cmp.sparse.stats.propagations > cmp.dense.stats.propagations {
            return Err(format!("rho {rho}: sparse above dense"));
        }
        ratios.push((rho, cmp.propagation_ratio()));
    }
    let at_95 = ratios.iter().find(|(r, _)| *r == 0.95).expect("measured").1;
    let sweep: Vec<(f64, f64)> = ratios.iter().copied().filter(|(r, _)| *r != 0.95).collect();
    let shown = sweep.iter().map(|(r, x)| format!("{r}:{x:.2}")).collect::<Vec<_>>().join(" ");
    if at_95 < 5.0 {
        return Err(format!("ratio {at_95:.2} < 5 at rho 0.95"));
    }
    if sweep.windows(2).any(|w| w[1].1 < w[0].1) {
        return Err(format!("ratio not monotone: {shown}"));
    }
    Ok(format!(
        "{} inputs never above dense; ratio {at_95:.2} at rho 0.95 (10^4 stmts); sweep {shown}",
        inputs.len()
    ))
}

fn speedup() -> Outcome {
    let graph = generated(100, 1000, 0.9);
    let statements = graph.program().statement_count();
    let cmp = compare_runs(&graph, Client::Lcp, 3).map_err(|e| e.to_string())?;
    let dense = cmp.dense.stats.total();
    let sparse = cmp.sparse.stats.total();
    let share = cmp.construction_share();
    let detail = format!(
        "{statements} stmts, rho 0.9: dense {dense:.2?}, sparse {sparse:.2?} ({:.2}x), construction {:.1}%",
        cmp.speedup(),
        share * 100.0
    );
    if !cmp.mismatches.is_empty() {
        return Err(format!("{detail}; results differ"));
    }
    if sparse.as_secs_f64() > 0.5 * dense.as_secs_f64() || share > 0.10 {
        return Err(detail);
    }
    Ok(detail)
}

fn sparsification_contrast() -> Outcome {
    let program = parse_program("proc main() {\n  a = 3\n  a = a + 1\n}\n").map_err(|e| e.to_string())?;
    let graph = graph_of(program);
    let main = graph.entries()[0];
    let a = Place::Local("a".into());

    let lcp = LcpProblem::new(&graph);
    let lcp_cfg = build_sparse_cfg(&lcp, &graph, main, lcp.fact(main, &a));
    let taint = TaintProblem::new(&graph);
    let taint_cfg = build_sparse_cfg(&taint, &graph, main, taint.facts().fact(main, &a));
    let (lcp_kept, taint_kept) = (lcp_cfg.retained(), taint_cfg.retained());
    if !(lcp_kept.contains(&1) && lcp_kept.contains(&2)) {
        return Err(format!("lcp retains {lcp_kept:?}"));
    }
    if taint_kept.contains(&1) || taint_kept.contains(&2) {
        return Err(format!("taint retains {taint_kept:?}"));
    }
    for client in [Client::Lcp, Client::Taint] {
        let cmp = compare_runs(&graph, client, 1).map_err(|e| e.to_string())?;
        if !cmp.mismatches.is_empty() {
            return Err(format!("{client}: sparse differs from dense"));
        }
    }
    let exit = NodeId::new(main, graph.procedure(main).exit());
    let value = run(&graph, Client::Lcp, Mode::Sparse).map_err(|e| e.to_string())?.value_at(exit, &a);
    if value != LatticeValue::Const(4) {
        return Err(format!("lcp a at exit is {value}"));
    }
    Ok(format!("lcp G_a = {lcp_kept:?}, taint G_a = {taint_kept:?}, both equal dense"))
}

fn guard_never_fires() -> Outcome {
    let mut runs = 0;
    let mut graphs: Vec<(String, Supergraph)> = Vec::new();
    for case in corpus() {
        graphs.push((case.id(), graph_of(case.program().map_err(|e| e.to_string())?)));
    }
    for rho in [0.0, 0.5, 0.9, 0.99, 1.0] {
        graphs.push((format!("gen rho {rho}"), generated(10, 300, rho)));
    }
    for (name, graph) in &graphs {
        for client in [Client::Lcp, Client::Taint] {
            for mode in [Mode::Dense, Mode::Sparse] {
                match run(graph, client, mode) {
                    Ok(_) => runs += 1,
                    Err(e @ SolverError::ChainHeightExceeded { .. }) => return Err(format!("{name} {client} {mode}: {e}")),
                }
            }
        }
    }
    Ok(format!("{runs} runs within the chain-height bound"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("Corpus equivalence (dense = sparse, < 10 s)", corpus_equivalence),
        ("Oracle equivalence (loop-free single-procedure cases)", oracle_equivalence),
        ("Edge algebra (10,000 randomized trials)", edge_algebra),
        ("Work reduction (propagations)", work_reduction),
        ("Speedup at desk scale (10^5 statements)", speedup),
        ("Sparsification contrast (a = 3; a = a + 1)", sparsification_contrast),
        ("Termination guard never fires", guard_never_fires),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
