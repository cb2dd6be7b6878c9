//! Benchmark harness: the labelled corpus, the synthetic generator, an
//! independent reference interpreter, and dense-versus-sparse comparisons.

mod corpus;
mod generator;
mod oracle;

use std::fmt::Write as _;
use std::path::Path;
use std::time::Duration;

use serde::Serialize;

pub use corpus::{corpus, Category, CorpusCase};
pub use generator::{generate_program, generate_source, generated_queries, GenError, GeneratorParams};
pub use oracle::{oracle_interpret, OracleError, OracleValues};

use crate::analysis::{compare_values, run, Client, Mismatch, Mode, Run};
use crate::ir::{NodeId, Place, Supergraph};
use crate::lattice::LatticeValue;
use crate::solver::{RunStats, SolverError};

/// An annotated value that the analysis did not reproduce.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpectationFailure {
    pub node: NodeId,
    pub place: Place,
    pub expected: LatticeValue,
    pub actual: LatticeValue,
}

/// Checks every `// expect` annotation of the program against `run`.
pub fn check_expectations(graph: &Supergraph, run: &Run) -> Vec<ExpectationFailure> {
    let program = graph.program();
    let mut out = Vec::new();
    for id in program.proc_ids() {
        for e in &program.procedure(id).expectations {
            let node = NodeId::new(id, e.node);
            let actual = run.value_at(node, &e.place);
            if actual != e.value {
                out.push(ExpectationFailure {
                    node,
                    place: e.place.clone(),
                    expected: e.value,
                    actual,
                });
            }
        }
    }
    out
}

/// Whether sparse and dense agree on every value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Equal,
    Differ,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Equal => "equal",
            Verdict::Differ => "differ",
        })
    }
}

/// A dense and a sparse run of the same program.
pub struct Comparison {
    pub dense: Run,
    pub sparse: Run,
    pub mismatches: Vec<Mismatch>,
}

impl Comparison {
    pub fn verdict(&self) -> Verdict {
        if self.mismatches.is_empty() {
            Verdict::Equal
        } else {
            Verdict::Differ
        }
    }

    /// Dense propagations per sparse propagation.
    pub fn propagation_ratio(&self) -> f64 {
        self.dense.stats.propagations as f64 / self.sparse.stats.propagations.max(1) as f64
    }

    /// Dense solver time over sparse solver time.
    pub fn speedup(&self) -> f64 {
        secs(self.dense.stats.total()) / secs(self.sparse.stats.total()).max(1e-9)
    }

    /// Share of the sparse solver time spent building sparse CFGs.
    pub fn construction_share(&self) -> f64 {
        secs(self.sparse.stats.sparse_cfg_time) / secs(self.sparse.stats.total()).max(1e-9)
    }
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

/// Runs `mode` `repeats` times and keeps the run with the median solver time.
pub fn timed_run(graph: &Supergraph, client: Client, mode: Mode, repeats: usize) -> Result<Run, SolverError> {
    let mut runs = Vec::with_capacity(repeats.max(1));
    for _ in 0..repeats.max(1) {
        runs.push(run(graph, client, mode)?);
    }
    runs.sort_by_key(|r| r.stats.total());
    let mid = runs.len() / 2;
    Ok(runs.swap_remove(mid))
}

/// Dense and sparse runs with median-of-`repeats` timing.
pub fn compare_runs(graph: &Supergraph, client: Client, repeats: usize) -> Result<Comparison, SolverError> {
    let dense = timed_run(graph, client, Mode::Dense, repeats)?;
    let sparse = timed_run(graph, client, Mode::Sparse, repeats)?;
    let mismatches = compare_values(&dense, &sparse);
    Ok(Comparison {
        dense,
        sparse,
        mismatches,
    })
}

/// One line of machine-readable benchmark output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub case: String,
    pub mode: String,
    pub wall_ms: f64,
    pub propagations: u64,
    pub sparse_cfg_count: usize,
    pub sparse_cfg_ms: f64,
    /// `null` when only one mode ran.
    pub verdict: Option<Verdict>,
}

impl Record {
    pub fn new(case: &str, mode: Mode, stats: &RunStats, verdict: Option<Verdict>) -> Record {
        Record {
            case: case.to_string(),
            mode: mode.to_string(),
            wall_ms: secs(stats.total()) * 1e3,
            propagations: stats.propagations,
            sparse_cfg_count: stats.sparse_cfg_count,
            sparse_cfg_ms: secs(stats.sparse_cfg_time) * 1e3,
            verdict,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("records serialize")
    }
}

/// The dense and sparse records of a comparison.
pub fn records(case: &str, cmp: &Comparison) -> [Record; 2] {
    let v = Some(cmp.verdict());
    [
        Record::new(case, Mode::Dense, &cmp.dense.stats, v),
        Record::new(case, Mode::Sparse, &cmp.sparse.stats, v),
    ]
}

/// Outcome of one corpus case.
pub struct CaseReport {
    pub case: CorpusCase,
    /// Annotations missed by the dense and the sparse run.
    pub dense_failures: Vec<ExpectationFailure>,
    pub sparse_failures: Vec<ExpectationFailure>,
    pub comparison: Comparison,
}

impl CaseReport {
    pub fn passed(&self) -> bool {
        self.dense_failures.is_empty() && self.sparse_failures.is_empty() && self.comparison.verdict() == Verdict::Equal
    }
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("{case}: {source}")]
    Ir {
        case: String,
        source: crate::ir::IrError,
    },
    #[error("{case}: {source}")]
    Solver { case: String, source: SolverError },
}

/// Runs one corpus case with both solvers. Annotations describe constant
/// values, so they are only checked for the constant-propagation client.
pub fn run_case(case: &CorpusCase, client: Client, repeats: usize) -> Result<CaseReport, BenchError> {
    let ir = |source| BenchError::Ir { case: case.id(), source };
    let program = case.program().map_err(ir)?;
    let graph = Supergraph::new(program, &["main"]).map_err(ir)?;
    let comparison = compare_runs(&graph, client, repeats).map_err(|source| BenchError::Solver {
        case: case.id(),
        source,
    })?;
    let (dense_failures, sparse_failures) = match client {
        Client::Lcp => (
            check_expectations(&graph, &comparison.dense),
            check_expectations(&graph, &comparison.sparse),
        ),
        Client::Taint => (Vec::new(), Vec::new()),
    };
    Ok(CaseReport {
        case: *case,
        dense_failures,
        sparse_failures,
        comparison,
    })
}

/// Runs every corpus case.
pub fn run_corpus(client: Client, repeats: usize) -> Result<Vec<CaseReport>, BenchError> {
    corpus().iter().map(|c| run_case(c, client, repeats)).collect()
}

/// Writes two-column plot data: `speedup.dat` (case index, speedup) and
/// `ratio.dat` (propagation ratio, speedup).
pub fn write_plot_data(dir: &Path, rows: &[(String, &Comparison)]) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut speedup = String::from("# case speedup\n");
    let mut ratio = String::from("# propagation_ratio speedup\n");
    for (i, (name, cmp)) in rows.iter().enumerate() {
        let _ = writeln!(speedup, "{i} {:.4} # {name}", cmp.speedup());
        let _ = writeln!(ratio, "{:.4} {:.4}", cmp.propagation_ratio(), cmp.speedup());
    }
    std::fs::write(dir.join("speedup.dat"), speedup)?;
    std::fs::write(dir.join("ratio.dat"), ratio)
}
