//! One-call entry points: run a client with a solver and query the result
//! by procedure, node and place.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::ir::{NodeId, Place, ProcId, Supergraph};
use crate::lattice::LatticeValue;
use crate::lcp::{LcpProblem, Symbol, TaintProblem};
use crate::solver::{solve_dense, IdeProblem, RunStats, SolverError, ValueMap};
use crate::sparse::{materialize, solve_sparse, SparseCfgCache};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Client {
    Lcp,
    Taint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Dense,
    Sparse,
}

impl fmt::Display for Client {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Client::Lcp => "lcp",
            Client::Taint => "taint",
        })
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Dense => "dense",
            Mode::Sparse => "sparse",
        })
    }
}

impl FromStr for Client {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "lcp" => Ok(Client::Lcp),
            "taint" => Ok(Client::Taint),
            _ => Err(format!("unknown client `{s}` (expected lcp or taint)")),
        }
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "dense" => Ok(Mode::Dense),
            "sparse" => Ok(Mode::Sparse),
            _ => Err(format!("unknown mode `{s}` (expected dense or sparse)")),
        }
    }
}

pub enum ClientProblem {
    Lcp(LcpProblem),
    Taint(TaintProblem),
}

impl ClientProblem {
    pub fn new(graph: &Supergraph, client: Client) -> ClientProblem {
        match client {
            Client::Lcp => ClientProblem::Lcp(LcpProblem::new(graph)),
            Client::Taint => ClientProblem::Taint(TaintProblem::new(graph)),
        }
    }

    /// The symbol table shared by both clients.
    pub fn symbols(&self) -> &LcpProblem {
        match self {
            ClientProblem::Lcp(p) => p,
            ClientProblem::Taint(p) => p.facts(),
        }
    }
}

/// A finished run with values at every node (skipped nodes included for
/// sparse runs).
pub struct Run {
    pub client: Client,
    pub mode: Mode,
    pub problem: ClientProblem,
    pub values: ValueMap<LatticeValue>,
    pub stats: RunStats,
    /// Sparse CFGs built during a sparse run.
    pub cache: Option<SparseCfgCache>,
}

fn solve<P: IdeProblem<Value = LatticeValue>>(
    problem: &P,
    graph: &Supergraph,
    mode: Mode,
) -> Result<(ValueMap<LatticeValue>, RunStats, Option<SparseCfgCache>), SolverError> {
    match mode {
        Mode::Dense => {
            let (values, phase1) = solve_dense(problem, graph)?;
            Ok((values, phase1.stats, None))
        }
        Mode::Sparse => {
            let mut sol = solve_sparse(problem, graph)?;
            let values = materialize(problem, graph, &mut sol);
            Ok((values, sol.phase1.stats, Some(sol.cache)))
        }
    }
}

pub fn run(graph: &Supergraph, client: Client, mode: Mode) -> Result<Run, SolverError> {
    let problem = ClientProblem::new(graph, client);
    let (values, stats, cache) = match &problem {
        ClientProblem::Lcp(p) => solve(p, graph, mode)?,
        ClientProblem::Taint(p) => solve(p, graph, mode)?,
    };
    Ok(Run {
        client,
        mode,
        problem,
        values,
        stats,
        cache,
    })
}

impl Run {
    /// Value of `place` on entry to `node`.
    pub fn value_at(&self, node: NodeId, place: &Place) -> LatticeValue {
        let symbols = self.problem.symbols();
        match symbols.lookup(&Symbol::from_place(node.proc, place)) {
            Some(d) => *self.values.get(node, d),
            None => LatticeValue::Top,
        }
    }

    /// Values keyed by symbol rather than fact id, without `⊤` entries.
    pub fn symbolic(&self) -> BTreeMap<(NodeId, Symbol), LatticeValue> {
        let symbols = self.problem.symbols();
        self.values
            .iter()
            .filter(|(_, d, v)| !d.is_lambda() && **v != LatticeValue::Top)
            .map(|(n, d, v)| ((n, symbols.symbol(d)), *v))
            .collect()
    }

    /// Sorted retained node lists of every sparse CFG built, by procedure
    /// and symbol.
    pub fn retained(&self) -> BTreeMap<(ProcId, Symbol), Vec<u32>> {
        let symbols = self.problem.symbols();
        self.cache
            .iter()
            .flat_map(|c| c.iter())
            .map(|cfg| ((cfg.proc, symbols.symbol(cfg.fact)), cfg.retained().to_vec()))
            .collect()
    }
}

/// A point where two runs disagree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub node: NodeId,
    pub symbol: Symbol,
    pub left: LatticeValue,
    pub right: LatticeValue,
}

/// Every `(node, symbol)` where the two runs differ.
pub fn compare_values(a: &Run, b: &Run) -> Vec<Mismatch> {
    let left = a.symbolic();
    let right = b.symbolic();
    let mut out = Vec::new();
    for (key, &l) in &left {
        let r = right.get(key).copied().unwrap_or(LatticeValue::Top);
        if l != r {
            out.push(Mismatch {
                node: key.0,
                symbol: key.1.clone(),
                left: l,
                right: r,
            });
        }
    }
    for (key, &r) in &right {
        if !left.contains_key(key) {
            out.push(Mismatch {
                node: key.0,
                symbol: key.1.clone(),
                left: LatticeValue::Top,
                right: r,
            });
        }
    }
    out
}
