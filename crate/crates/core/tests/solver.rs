use sparse_ide::analysis::{self, Client, Mode};
use sparse_ide::ir::{parse_program, NodeId, Place, Supergraph};
use sparse_ide::lattice::LatticeValue::{self, Bottom, Const, Top};
use sparse_ide::lcp::{LcpEdge, LcpProblem, Symbol};
use sparse_ide::solver::{compute_phase2, query_value, solve_dense, solve_phase1, Fact};

fn graph(src: &str) -> Supergraph {
    Supergraph::new(parse_program(src).unwrap(), &["main"]).unwrap()
}

fn main_node(g: &Supergraph, label: &str) -> NodeId {
    let p = g.program().proc_id("main").unwrap();
    g.program().parse_node(p, label).unwrap()
}

fn fact(problem: &LcpProblem, g: &Supergraph, proc: &str, name: &str) -> Fact {
    let p = g.program().proc_id(proc).unwrap();
    problem.fact(p, &Place::Local(name.into()))
}

fn value(src: &str, node: &str, place: &str) -> LatticeValue {
    let g = graph(src);
    let run = analysis::run(&g, Client::Lcp, Mode::Dense).unwrap();
    run.value_at(main_node(&g, node), &Place::parse(place).unwrap())
}

#[test]
fn copy_of_constant_reaches_exit() {
    let g = graph("proc main() {\n  a = 3\n  b = a\n}");
    let problem = LcpProblem::new(&g);
    let phase1 = solve_phase1(&problem, &g).unwrap();
    let b = fact(&problem, &g, "main", "b");
    let exit = g.exit_of(g.program().proc_id("main").unwrap());
    assert_eq!(phase1.jump.get(Fact::LAMBDA, exit, b), Some(&LcpEdge::Constant(3)));
}

#[test]
fn empty_main_only_carries_lambda() {
    let g = graph("proc main() {\n}");
    let problem = LcpProblem::new(&g);
    let phase1 = solve_phase1(&problem, &g).unwrap();
    let start = main_node(&g, "start");
    assert_eq!(phase1.jump.get(Fact::LAMBDA, start, Fact::LAMBDA), Some(&LcpEdge::Identity));
    for (d1, _, d2, f) in phase1.jump.iter() {
        assert!(d1.is_lambda() && d2.is_lambda());
        assert_eq!(*f, LcpEdge::Identity);
    }
    assert!(phase1.summary.is_empty());
}

#[test]
fn identity_callee_summary() {
    let g = graph("proc id(x) {\n  return x\n}\nproc main() {\n  a = 5\n  r = call id(a)\n}");
    let problem = LcpProblem::new(&g);
    let phase1 = solve_phase1(&problem, &g).unwrap();
    let call = main_node(&g, "2");
    let a = fact(&problem, &g, "main", "a");
    let r = fact(&problem, &g, "main", "r");
    assert_eq!(phase1.summary.get(call, a, r), Some(&LcpEdge::Identity));
    let values = compute_phase2(&problem, &g, &phase1.jump);
    assert_eq!(query_value(&values, main_node(&g, "exit"), r), Const(5));
}

#[test]
fn phase2_examples() {
    assert_eq!(value("proc main() {\n  a = 3\n  a = a + 1\n}", "exit", "a"), Const(4));
    let diamond = "proc main() {\n  if * goto L\n  a = 1\n  goto M\nL:\n  a = 2\nM:\n  b = a\n}";
    assert_eq!(value(diamond, "exit", "b"), Bottom);
    assert_eq!(value(diamond, "exit", "a"), Bottom);
}

#[test]
fn start_value_of_lambda_is_top() {
    let g = graph("proc main() {\n  a = 3\n}");
    let problem = LcpProblem::new(&g);
    let (values, _) = solve_dense(&problem, &g).unwrap();
    assert_eq!(query_value(&values, main_node(&g, "start"), Fact::LAMBDA), Top);
    assert_eq!(query_value(&values, main_node(&g, "exit"), Fact::LAMBDA), Top);
}

#[test]
fn query_examples() {
    let src = "proc main() {\n  b = 1\n  a = 3\n  c = a\n}";
    assert_eq!(value(src, "2", "a"), Top);
    assert_eq!(value(src, "3", "a"), Const(3));
}

#[test]
fn context_sensitive_callee() {
    let src = "proc inc(x) {\n  y = x + 1\n  return y\n}\nproc main() {\n  a = 1\n  b = 10\n  r = call inc(a)\n  s = call inc(b)\n}";
    assert_eq!(value(src, "exit", "r"), Const(2));
    assert_eq!(value(src, "exit", "s"), Const(11));
    assert_eq!(value(src, "exit", "a"), Const(1));
}

#[test]
fn recursion_terminates() {
    let src = "proc f(x) {\n  if * goto L\n  y = x + 1\n  z = call f(y)\n  return z\nL:\n  return x\n}\nproc main() {\n  a = 0\n  r = call f(a)\n}";
    assert_eq!(value(src, "exit", "r"), Bottom);
    assert_eq!(value(src, "exit", "a"), Const(0));
}

#[test]
fn heap_through_callee() {
    let src = "proc set(o) {\n  v = 7\n  o.f = v\n}\nproc main() {\n  x = new\n  call set(x)\n  y = x.f\n}";
    assert_eq!(value(src, "exit", "y"), Const(7));
    let statics = "proc set() {\n  v = 9\n  @C.g = v\n}\nproc main() {\n  call set()\n  y = @C.g\n}";
    assert_eq!(value(statics, "exit", "y"), Const(9));
}

#[test]
fn deterministic_runs() {
    let src = "proc inc(x) {\n  y = x * 2\n  return y\n}\nproc main() {\n  a = 1\n  if * goto L\n  a = 2\nL:\n  r = call inc(a)\n  o = new\n  o.f = r\n  q = o.f\n}";
    let g = graph(src);
    for mode in [Mode::Dense, Mode::Sparse] {
        let a = analysis::run(&g, Client::Lcp, mode).unwrap();
        let b = analysis::run(&g, Client::Lcp, mode).unwrap();
        assert_eq!(a.symbolic(), b.symbolic());
        assert_eq!(a.stats.propagations, b.stats.propagations);
    }
}

#[test]
fn symbol_lookup_for_unknown_place_is_top() {
    let g = graph("proc main() {\n  a = 3\n}");
    let run = analysis::run(&g, Client::Lcp, Mode::Dense).unwrap();
    assert_eq!(run.value_at(main_node(&g, "exit"), &Place::Local("zz".into())), Top);
    let p = g.program().proc_id("main").unwrap();
    assert!(run.problem.symbols().lookup(&Symbol::Local { proc: p, name: "a".into() }).is_some());
}
