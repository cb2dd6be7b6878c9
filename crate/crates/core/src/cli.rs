//! Command-line front end: `analyze`, `bench`, `gen` and `diff`.
//!
//! Exit codes: 0 success, 1 parse error, 2 unknown entry or query, bad
//! parameters or unreadable input, 3 solver guard tripped, 4 dense and
//! sparse results differ (or a corpus annotation fails).

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{compare_values, run, Client, Mode, Run};
use crate::bench::{
    check_expectations, compare_runs, corpus, generate_source, records, timed_run, write_plot_data, Comparison,
    GeneratorParams, Record,
};
use crate::ir::{parse_program, IrError, NodeId, Place, Program, Supergraph};
use crate::solver::SolverError;

pub const EXIT_PARSE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_GUARD: i32 = 3;
pub const EXIT_DIFFER: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "sparse-ide", version, about = "Dense and sparse IDE data-flow analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analyze IR files and print query results.
    Analyze(AnalyzeArgs),
    /// Compare dense and sparse runs and emit statistics.
    Bench(BenchArgs),
    /// Write a synthetic stress program.
    Gen(GenArgs),
    /// Print every value on which dense and sparse disagree.
    Diff(DiffArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Dense,
    Sparse,
    Both,
}

impl ModeArg {
    fn modes(self) -> &'static [Mode] {
        match self {
            ModeArg::Dense => &[Mode::Dense],
            ModeArg::Sparse => &[Mode::Sparse],
            ModeArg::Both => &[Mode::Dense, Mode::Sparse],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ClientArg {
    Lcp,
    Taint,
}

impl From<ClientArg> for Client {
    fn from(c: ClientArg) -> Client {
        match c {
            ClientArg::Lcp => Client::Lcp,
            ClientArg::Taint => Client::Taint,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Records,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// IR files; procedures of all files form one program.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Entry procedure (repeatable).
    #[arg(long = "entry", default_value = "main")]
    pub entries: Vec<String>,
    #[arg(long, value_enum, default_value = "lcp")]
    pub client: ClientArg,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value = "sparse")]
    pub mode: ModeArg,
    /// `proc:stmt:symbol`, where stmt is `start`, `exit` or a node index.
    #[arg(long = "query")]
    pub queries: Vec<String>,
    /// Print every non-T symbol at the exit of every analyzed procedure.
    #[arg(long)]
    pub all_exits: bool,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// IR files to benchmark (each is one case).
    pub inputs: Vec<PathBuf>,
    /// Run the built-in corpus.
    #[arg(long)]
    pub corpus: bool,
    /// Generated program, as `key=value` pairs: rho (or ρ), n (total
    /// statements), procs, stmts, depth, branch, fields, calls, seed.
    #[arg(long)]
    pub gen: Option<String>,
    #[arg(long, value_enum, default_value = "lcp")]
    pub client: ClientArg,
    #[arg(long, value_enum, default_value = "both")]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value = "records")]
    pub format: Format,
    /// Runs per mode; the median run is reported.
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    /// Write two-column plot data files into this directory.
    #[arg(long)]
    pub plot_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, default_value_t = 10)]
    pub procs: usize,
    /// Statements per procedure.
    #[arg(long, default_value_t = 100)]
    pub stmts: usize,
    #[arg(long, default_value_t = 0.5)]
    pub rho: f64,
    #[arg(long, default_value_t = 3)]
    pub depth: usize,
    #[arg(long, default_value_t = 0.02)]
    pub branch_density: f64,
    #[arg(long, default_value_t = 0.01)]
    pub field_density: f64,
    #[arg(long, default_value_t = 2)]
    pub calls: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Output file; standard output if absent.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

impl GenArgs {
    fn params(&self) -> GeneratorParams {
        GeneratorParams {
            procs: self.procs,
            stmts_per_proc: self.stmts,
            rho: self.rho,
            depth: self.depth,
            branch_density: self.branch_density,
            field_density: self.field_density,
            calls_per_proc: self.calls,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Args)]
pub struct DiffArgs {
    #[command(flatten)]
    pub input: InputArgs,
}

/// A failure carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Failure {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<SolverError> for Failure {
    fn from(e: SolverError) -> Failure {
        Failure::new(EXIT_GUARD, e.to_string())
    }
}

type CliResult = Result<i32, Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not errors.
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return EXIT_USAGE;
            }
            let _ = write!(out, "{e}");
            return 0;
        }
    };
    let result = match &cli.command {
        Command::Analyze(a) => analyze(a, out),
        Command::Bench(b) => bench(b, out, err),
        Command::Gen(g) => gen(g, out, err),
        Command::Diff(d) => diff(d, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

/// Reads and concatenates the inputs. Parse errors name the file and the
/// line and column within it.
pub fn load_program(paths: &[PathBuf]) -> Result<Program, Failure> {
    let mut text = String::new();
    let mut starts = Vec::new();
    for path in paths {
        let src = std::fs::read_to_string(path)
            .map_err(|e| Failure::new(EXIT_USAGE, format!("{}: {e}", path.display())))?;
        starts.push((text.lines().count(), path));
        text.push_str(&src);
        if !text.ends_with('\n') {
            text.push('\n');
        }
    }
    parse_program(&text).map_err(|e| {
        let Some(line) = error_line(&e) else {
            return Failure::new(EXIT_PARSE, e.to_string());
        };
        let (offset, path) = starts.iter().rev().find(|(s, _)| *s < line).copied().expect("line in some file");
        let local = line - offset;
        let message = match &e {
            IrError::Syntax { column, message, .. } => format!("{}:{local}:{column}: {message}", path.display()),
            _ => {
                let rest = e.to_string();
                let rest = rest.split_once(": ").map_or(rest.as_str(), |(_, r)| r).to_string();
                format!("{}:{local}: {rest}", path.display())
            }
        };
        Failure::new(EXIT_PARSE, message)
    })
}

fn error_line(e: &IrError) -> Option<usize> {
    match e {
        IrError::Syntax { line, .. }
        | IrError::UnknownCallee { line, .. }
        | IrError::ArityMismatch { line, .. }
        | IrError::DuplicateProcedure { line, .. }
        | IrError::DuplicateLabel { line, .. }
        | IrError::UnresolvedLabel { line, .. } => Some(*line),
        IrError::UnknownEntry(_) | IrError::NoEntries => None,
    }
}

fn load_graph(input: &InputArgs) -> Result<Supergraph, Failure> {
    let program = load_program(&input.inputs)?;
    let entries: Vec<&str> = input.entries.iter().map(String::as_str).collect();
    Supergraph::new(program, &entries).map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))
}

/// A parsed `proc:stmt:symbol` query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub node: NodeId,
    pub place: Place,
}

pub fn parse_query(program: &Program, text: &str) -> Result<Query, Failure> {
    let bad = |why: &str| Failure::new(EXIT_USAGE, format!("query `{text}`: {why}"));
    let mut parts = text.splitn(3, ':');
    let (Some(proc), Some(stmt), Some(sym)) = (parts.next(), parts.next(), parts.next()) else {
        return Err(bad("expected proc:stmt:symbol"));
    };
    let id = program.proc_id(proc).ok_or_else(|| bad("unknown procedure"))?;
    let node = program.parse_node(id, stmt).ok_or_else(|| bad("unknown statement"))?;
    let place = Place::parse(sym).ok_or_else(|| bad("malformed symbol"))?;
    Ok(Query { node, place })
}

fn query_line(program: &Program, node: NodeId, symbol: &dyn std::fmt::Display, value: &dyn std::fmt::Display) -> String {
    let proc = &program.procedure(node.proc).name;
    format!("{proc} {} {symbol} {value}", program.node_label(node))
}

fn case_name(paths: &[PathBuf]) -> String {
    paths
        .iter()
        .map(|p| p.file_stem().map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned()))
        .collect::<Vec<_>>()
        .join("+")
}

fn analyze(args: &AnalyzeArgs, out: &mut dyn Write) -> CliResult {
    let graph = load_graph(&args.input)?;
    let program = graph.program();
    let queries = args
        .queries
        .iter()
        .map(|q| parse_query(program, q))
        .collect::<Result<Vec<_>, _>>()?;
    let client = args.input.client.into();
    let mut runs: Vec<Run> = Vec::new();
    for &mode in args.mode.modes() {
        runs.push(run(&graph, client, mode)?);
    }
    let mismatches = match runs.as_slice() {
        [a, b] => Some(compare_values(a, b)),
        _ => None,
    };
    let verdict = mismatches.as_ref().map(|m| {
        if m.is_empty() {
            crate::bench::Verdict::Equal
        } else {
            crate::bench::Verdict::Differ
        }
    });
    let case = case_name(&args.input.inputs);
    let shown = runs.last().expect("at least one mode");

    match args.format {
        Format::Records => {
            for r in &runs {
                writeln_out(out, &Record::new(&case, r.mode, &r.stats, verdict).to_json())?;
            }
        }
        Format::Text => {
            for q in &queries {
                let v = shown.value_at(q.node, &q.place);
                writeln_out(out, &query_line(program, q.node, &q.place, &v))?;
            }
            if args.all_exits {
                let symbolic = shown.symbolic();
                for id in program.proc_ids().filter(|&p| graph.is_reachable(p)) {
                    let exit = graph.exit_of(id);
                    for ((_, sym), v) in symbolic.iter().filter(|((n, _), _)| *n == exit) {
                        writeln_out(out, &query_line(program, exit, sym, v))?;
                    }
                }
            }
        }
    }
    match mismatches {
        Some(m) if !m.is_empty() => Err(Failure::new(
            EXIT_DIFFER,
            format!("dense and sparse differ at {} points", m.len()),
        )),
        _ => Ok(0),
    }
}

fn writeln_out(out: &mut dyn Write, line: &str) -> Result<(), Failure> {
    writeln!(out, "{line}").map_err(|e| Failure::new(EXIT_USAGE, format!("write failed: {e}")))
}

/// Parses `key=value,key=value` generator settings.
pub fn parse_gen_spec(spec: &str) -> Result<GeneratorParams, Failure> {
    let mut p = GeneratorParams::default();
    let mut total = None;
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let bad = || Failure::new(EXIT_USAGE, format!("bad generator setting `{item}`"));
        let (key, value) = item.split_once('=').ok_or_else(bad)?;
        let value = value.trim();
        let int = || value.parse::<usize>().map_err(|_| bad());
        let float = || value.parse::<f64>().map_err(|_| bad());
        match key.trim() {
            "rho" | "ρ" => p.rho = float()?,
            "n" => total = Some(int()?),
            "procs" => p.procs = int()?,
            "stmts" => p.stmts_per_proc = int()?,
            "depth" => p.depth = int()?,
            "branch" => p.branch_density = float()?,
            "fields" => p.field_density = float()?,
            "calls" => p.calls_per_proc = int()?,
            "seed" => p.seed = value.parse().map_err(|_| bad())?,
            _ => return Err(bad()),
        }
    }
    if let Some(n) = total {
        p.stmts_per_proc = n / p.procs.max(1);
    }
    p.validate().map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
    Ok(p)
}

struct BenchCase {
    name: String,
    graph: Supergraph,
}

fn bench(args: &BenchArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    let mut cases = Vec::new();
    if args.corpus {
        for case in corpus() {
            let program = case.program().map_err(|e| Failure::new(EXIT_PARSE, format!("{}: {e}", case.id())))?;
            let graph = Supergraph::new(program, &["main"]).map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
            cases.push(BenchCase { name: case.id(), graph });
        }
    }
    if let Some(spec) = &args.gen {
        let params = parse_gen_spec(spec)?;
        let src = generate_source(&params).map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
        let program = parse_program(&src).map_err(|e| Failure::new(EXIT_PARSE, e.to_string()))?;
        let graph = Supergraph::new(program, &["main"]).map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
        let name = format!("gen(rho={},n={},seed={})", params.rho, params.procs * params.stmts_per_proc, params.seed);
        cases.push(BenchCase { name, graph });
    }
    for path in &args.inputs {
        let program = load_program(std::slice::from_ref(path))?;
        let graph = Supergraph::new(program, &["main"]).map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
        cases.push(BenchCase {
            name: case_name(std::slice::from_ref(path)),
            graph,
        });
    }
    if cases.is_empty() {
        return Err(Failure::new(EXIT_USAGE, "nothing to benchmark: give --corpus, --gen or input files"));
    }

    let client: Client = args.client.into();
    let mut failed = 0usize;
    let mut comparisons: Vec<(String, Comparison)> = Vec::new();
    for case in &cases {
        if args.mode == ModeArg::Both {
            let cmp = compare_runs(&case.graph, client, args.repeats)?;
            let mut bad = !cmp.mismatches.is_empty();
            if args.corpus && client == Client::Lcp {
                for r in [&cmp.dense, &cmp.sparse] {
                    for f in check_expectations(&case.graph, r) {
                        bad = true;
                        let _ = writeln!(
                            err,
                            "{} {}: {} {} expected {} got {}",
                            case.name,
                            r.mode,
                            case.graph.program().node_label(f.node),
                            f.place,
                            f.expected,
                            f.actual
                        );
                    }
                }
            }
            failed += bad as usize;
            emit_comparison(args.format, &case.name, &cmp, out)?;
            comparisons.push((case.name.clone(), cmp));
        } else {
            let mode = args.mode.modes()[0];
            let r = timed_run(&case.graph, client, mode, args.repeats)?;
            let record = Record::new(&case.name, mode, &r.stats, None);
            match args.format {
                Format::Records => writeln_out(out, &record.to_json())?,
                Format::Text => writeln_out(out, &text_record(&record))?,
            }
        }
    }
    if let Some(dir) = &args.plot_dir {
        let rows: Vec<(String, &Comparison)> = comparisons.iter().map(|(n, c)| (n.clone(), c)).collect();
        write_plot_data(dir, &rows).map_err(|e| Failure::new(EXIT_USAGE, format!("{}: {e}", dir.display())))?;
    }
    if failed > 0 {
        return Err(Failure::new(EXIT_DIFFER, format!("{failed} case(s) failed")));
    }
    Ok(0)
}

fn text_record(r: &Record) -> String {
    let verdict = r.verdict.map_or_else(|| "-".to_string(), |v| v.to_string());
    format!(
        "{:<40} {:<6} {:>10.3} ms {:>10} props {:>6} cfgs {:>8.3} ms {}",
        r.case, r.mode, r.wall_ms, r.propagations, r.sparse_cfg_count, r.sparse_cfg_ms, verdict
    )
}

fn emit_comparison(format: Format, case: &str, cmp: &Comparison, out: &mut dyn Write) -> Result<(), Failure> {
    for record in records(case, cmp) {
        match format {
            Format::Records => writeln_out(out, &record.to_json())?,
            Format::Text => writeln_out(out, &text_record(&record))?,
        }
    }
    if format == Format::Text {
        writeln_out(
            out,
            &format!(
                "{case}: propagation ratio {:.2}, speedup {:.2}, construction share {:.3}",
                cmp.propagation_ratio(),
                cmp.speedup(),
                cmp.construction_share()
            ),
        )?;
    }
    Ok(())
}

fn gen(args: &GenArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    let params = args.params();
    let src = generate_source(&params).map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
    let program = parse_program(&src).map_err(|e| Failure::new(EXIT_PARSE, e.to_string()))?;
    let summary = format!(
        "{} statements in {} procedures",
        program.statement_count(),
        program.procedures.len()
    );
    match &args.output {
        Some(path) => {
            write_file(path, &src)?;
            writeln_out(out, &summary)?;
        }
        None => {
            out.write_all(src.as_bytes())
                .map_err(|e| Failure::new(EXIT_USAGE, format!("write failed: {e}")))?;
            let _ = writeln!(err, "{summary}");
        }
    }
    Ok(0)
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::new(EXIT_USAGE, format!("{}: {e}", path.display())))
}

fn diff(args: &DiffArgs, out: &mut dyn Write) -> CliResult {
    let graph = load_graph(&args.input)?;
    let client = args.input.client.into();
    let dense = run(&graph, client, Mode::Dense)?;
    let sparse = run(&graph, client, Mode::Sparse)?;
    let mismatches = compare_values(&dense, &sparse);
    for m in &mismatches {
        let program = graph.program();
        let proc = &program.procedure(m.node.proc).name;
        writeln_out(
            out,
            &format!("{proc} {} {} dense={} sparse={}", program.node_label(m.node), m.symbol, m.left, m.right),
        )?;
    }
    if mismatches.is_empty() {
        writeln_out(out, "equal")?;
        Ok(0)
    } else {
        Ok(EXIT_DIFFER)
    }
}
