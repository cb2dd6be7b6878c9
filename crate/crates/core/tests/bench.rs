use sparse_ide::analysis::{run, Client, Mode};
use sparse_ide::bench::{
    compare_runs, corpus, generate_program, generate_source, oracle_interpret, records, run_corpus, Category,
    GeneratorParams, OracleError, Verdict,
};
use sparse_ide::ir::{parse_program, NodeId, Supergraph};
use sparse_ide::lattice::LatticeValue;

#[test]
fn corpus_has_every_category() {
    let cases = corpus();
    for cat in Category::ALL {
        let n = cases.iter().filter(|c| c.category == cat).count();
        assert!(n >= 4, "{cat} has {n} cases");
    }
    assert_eq!(cases.len(), 42);
    let mut ids: Vec<String> = cases.iter().map(|c| c.id()).collect();
    ids.sort();
    ids.dedup();
    assert_eq!(ids.len(), cases.len());
    assert!(cases.iter().all(|c| c.program().is_ok()));
}

#[test]
fn corpus_annotations_hold_and_sparse_equals_dense() {
    for report in run_corpus(Client::Lcp, 1).unwrap() {
        let id = report.case.id();
        assert!(report.dense_failures.is_empty(), "{id}: dense {:?}", report.dense_failures);
        assert!(report.sparse_failures.is_empty(), "{id}: sparse {:?}", report.sparse_failures);
        assert!(report.comparison.mismatches.is_empty(), "{id}: {:?}", report.comparison.mismatches);
        assert!(report.passed());
    }
    for report in run_corpus(Client::Taint, 1).unwrap() {
        assert!(report.passed(), "{}: {:?}", report.case.id(), report.comparison.mismatches);
    }
}

#[test]
fn every_annotated_case_has_annotations() {
    for case in corpus() {
        let p = case.program().unwrap();
        let n: usize = p.procedures.iter().map(|p| p.expectations.len()).sum();
        assert!(n > 0, "{}", case.id());
    }
}

/// Single-procedure loop-free cases: the analysis must agree with running
/// every path on concrete values.
#[test]
fn oracle_agrees_on_single_procedure_loop_free_cases() {
    let mut checked = 0;
    for case in corpus() {
        let program = case.program().unwrap();
        if program.procedures.len() != 1 {
            continue;
        }
        let oracle = match oracle_interpret(&program, "main", 8) {
            Ok(v) => v,
            Err(OracleError::Loop(_)) => continue,
            Err(e) => panic!("{}: {e}", case.id()),
        };
        let graph = Supergraph::new(program, &["main"]).unwrap();
        for mode in [Mode::Dense, Mode::Sparse] {
            let r = run(&graph, Client::Lcp, mode).unwrap();
            let p = graph.program().procedure(graph.entries()[0]);
            for i in 0..p.node_count() as u32 {
                let node = NodeId::new(graph.entries()[0], i);
                for place in all_places(&graph) {
                    let want = oracle.get(&(node, place.clone())).copied().unwrap_or(LatticeValue::Top);
                    let got = r.value_at(node, &place);
                    assert_eq!(got, want, "{} {mode} node {i} {place}", case.id());
                }
            }
        }
        checked += 1;
    }
    assert!(checked >= 15, "only {checked} cases checked");
}

fn all_places(graph: &Supergraph) -> Vec<sparse_ide::ir::Place> {
    let p = &graph.program().procedures[0];
    let mut out: Vec<_> = p.locals().into_iter().map(sparse_ide::ir::Place::Local).collect();
    for stmt in &p.body {
        let text = format!("{}", stmt.kind);
        for tok in text.split(|c: char| c.is_whitespace() || c == '=' || c == '+' || c == '*' || c == '-') {
            if let Some(place) = sparse_ide::ir::Place::parse(tok) {
                if !out.contains(&place) {
                    out.push(place);
                }
            }
        }
    }
    out
}

#[test]
fn oracle_examples() {
    let src = "proc main() {\n  a = 1\n  if * goto L\n  a = 2\nL:\n  b = a\n  c = 5\n}\n";
    let program = parse_program(src).unwrap();
    let v = oracle_interpret(&program, "main", 4).unwrap();
    let exit = NodeId::new(program.proc_id("main").unwrap(), program.procedures[0].exit());
    let get = |name: &str| v.get(&(exit, sparse_ide::ir::Place::Local(name.into()))).copied();
    assert_eq!(get("a"), Some(LatticeValue::Bottom));
    assert_eq!(get("b"), Some(LatticeValue::Bottom));
    assert_eq!(get("c"), Some(LatticeValue::Const(5)));

    let looping = parse_program("proc main() {\nL:\n  if * goto L\n}\n").unwrap();
    assert!(matches!(oracle_interpret(&looping, "main", 4), Err(OracleError::Loop(_))));
    assert!(matches!(oracle_interpret(&program, "nope", 4), Err(OracleError::UnknownEntry(_))));
}

#[test]
fn records_are_json_lines() {
    let graph = Supergraph::new(corpus()[0].program().unwrap(), &["main"]).unwrap();
    let cmp = compare_runs(&graph, Client::Lcp, 3).unwrap();
    assert_eq!(cmp.verdict(), Verdict::Equal);
    for r in records("x", &cmp) {
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        for key in ["case", "mode", "wall_ms", "propagations", "sparse_cfg_count", "sparse_cfg_ms", "verdict"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["verdict"], "equal");
    }
}

fn params(rho: f64, procs: usize, stmts: usize) -> GeneratorParams {
    GeneratorParams {
        procs,
        stmts_per_proc: stmts,
        rho,
        ..GeneratorParams::default()
    }
}

#[test]
fn generator_is_deterministic_and_sized() {
    let p = params(0.5, 10, 100);
    assert_eq!(generate_source(&p).unwrap(), generate_source(&p).unwrap());
    let other = GeneratorParams { seed: 8, ..p.clone() };
    assert_ne!(generate_source(&p).unwrap(), generate_source(&other).unwrap());
    let program = generate_program(&p).unwrap();
    assert_eq!(program.procedures.len(), 10);
    for proc in &program.procedures {
        assert_eq!(proc.body.len(), 100, "{}", proc.name);
    }
    let graph = Supergraph::new(program, &["main"]).unwrap();
    assert!(graph.program().proc_ids().all(|id| graph.is_reachable(id)));
    assert!(GeneratorParams { rho: 1.5, ..p.clone() }.validate().is_err());
}

#[test]
fn generated_programs_agree_across_modes() {
    for rho in [0.0, 0.5, 0.9] {
        let graph = Supergraph::new(generate_program(&params(rho, 6, 60)).unwrap(), &["main"]).unwrap();
        for client in [Client::Lcp, Client::Taint] {
            let cmp = compare_runs(&graph, client, 1).unwrap();
            assert!(cmp.mismatches.is_empty(), "rho {rho} {client}: {:?}", &cmp.mismatches[..1]);
        }
    }
}

#[test]
fn propagation_ratio_grows_with_rho() {
    let mut last = 0.0;
    for rho in [0.0, 0.5, 0.9, 0.99] {
        let graph = Supergraph::new(generate_program(&params(rho, 10, 200)).unwrap(), &["main"]).unwrap();
        let cmp = compare_runs(&graph, Client::Lcp, 1).unwrap();
        let ratio = cmp.propagation_ratio();
        eprintln!("rho {rho}: ratio {ratio:.2}");
        assert!(ratio > last, "rho {rho}: {ratio} <= {last}");
        last = ratio;
    }
}

#[test]
fn rho_zero_costs_about_the_same() {
    let graph = Supergraph::new(generate_program(&params(0.0, 10, 200)).unwrap(), &["main"]).unwrap();
    let cmp = compare_runs(&graph, Client::Lcp, 1).unwrap();
    let ratio = cmp.propagation_ratio();
    eprintln!("rho 0: ratio {ratio:.3}");
    assert!((0.9..=1.1).contains(&ratio), "{ratio}");
}

#[test]
fn all_decoy_programs_leave_queries_top() {
    let p = params(1.0, 4, 50);
    let graph = Supergraph::new(generate_program(&p).unwrap(), &["main"]).unwrap();
    let r = run(&graph, Client::Lcp, Mode::Sparse).unwrap();
    for id in graph.program().proc_ids() {
        let exit = graph.exit_of(id);
        assert_eq!(r.value_at(exit, &sparse_ide::ir::Place::Local("v".into())), LatticeValue::Top);
    }
}
