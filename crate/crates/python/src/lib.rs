//! Python bindings: parse programs, run the dense or sparse solver, compare
//! the two, and generate stress programs.

#[pyo3::pymodule]
pub mod sparse_ide_py {
    use std::collections::BTreeMap;

    use pyo3::exceptions::{PyRuntimeError, PyValueError};
    use pyo3::prelude::*;
    use pyo3::types::PyDict;

    use sparse_ide::analysis::{self, compare_values, Client, Mode, Run};
    use sparse_ide::bench::{self, GeneratorParams};
    use sparse_ide::ir::{parse_program, Place, Supergraph};
    use sparse_ide::lattice::LatticeValue;

    fn value_err(e: impl ToString) -> PyErr {
        PyValueError::new_err(e.to_string())
    }

    fn client(name: &str) -> PyResult<Client> {
        name.parse().map_err(value_err)
    }

    fn mode(name: &str) -> PyResult<Mode> {
        name.parse().map_err(value_err)
    }

    /// `T`, `B` or the constant.
    fn to_py(py: Python<'_>, v: LatticeValue) -> PyResult<Py<PyAny>> {
        Ok(match v {
            LatticeValue::Const(c) => c.into_pyobject(py)?.into_any().unbind(),
            other => other.to_string().into_pyobject(py)?.into_any().unbind(),
        })
    }

    /// A parsed program with its entry procedures.
    #[pyclass(unsendable)]
    struct Program {
        graph: Supergraph,
    }

    #[pymethods]
    impl Program {
        #[new]
        #[pyo3(signature = (source, entries = vec!["main".to_string()]))]
        fn new(source: &str, entries: Vec<String>) -> PyResult<Self> {
            let program = parse_program(source).map_err(value_err)?;
            let entries: Vec<&str> = entries.iter().map(String::as_str).collect();
            let graph = Supergraph::new(program, &entries).map_err(value_err)?;
            Ok(Program { graph })
        }

        fn procedures(&self) -> Vec<String> {
            self.graph.program().procedures.iter().map(|p| p.name.clone()).collect()
        }

        fn statement_count(&self) -> usize {
            self.graph.program().statement_count()
        }

        fn __repr__(&self) -> String {
            format!(
                "Program({} procedures, {} statements)",
                self.graph.program().procedures.len(),
                self.statement_count()
            )
        }
    }

    /// The result of one solver run.
    #[pyclass(unsendable)]
    struct Analysis {
        graph: Supergraph,
        run: Run,
    }

    #[pymethods]
    impl Analysis {
        /// Value of `symbol` on entry to `stmt` (`start`, `exit` or an index) of `proc`.
        fn value(&self, py: Python<'_>, proc: &str, stmt: &str, symbol: &str) -> PyResult<Py<PyAny>> {
            let program = self.graph.program();
            let id = program.proc_id(proc).ok_or_else(|| value_err(format!("unknown procedure `{proc}`")))?;
            let node = program
                .parse_node(id, stmt)
                .ok_or_else(|| value_err(format!("unknown statement `{stmt}`")))?;
            let place = Place::parse(symbol).ok_or_else(|| value_err(format!("malformed symbol `{symbol}`")))?;
            to_py(py, self.run.value_at(node, &place))
        }

        /// Every non-T value as `(proc, stmt, symbol, value)`.
        fn values(&self, py: Python<'_>) -> PyResult<Vec<(String, String, String, Py<PyAny>)>> {
            let program = self.graph.program();
            self.run
                .symbolic()
                .into_iter()
                .map(|((node, sym), v)| {
                    Ok((
                        program.procedure(node.proc).name.clone(),
                        program.node_label(node),
                        sym.to_string(),
                        to_py(py, v)?,
                    ))
                })
                .collect()
        }

        fn stats<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
            let s = &self.run.stats;
            let d = PyDict::new(py);
            d.set_item("mode", self.run.mode.to_string())?;
            d.set_item("client", self.run.client.to_string())?;
            d.set_item("propagations", s.propagations)?;
            d.set_item("jump_entries", s.jump_entries)?;
            d.set_item("summary_entries", s.summary_entries)?;
            d.set_item("wall_ms", s.total().as_secs_f64() * 1e3)?;
            d.set_item("sparse_cfg_count", s.sparse_cfg_count)?;
            d.set_item("sparse_cfg_ms", s.sparse_cfg_time.as_secs_f64() * 1e3)?;
            Ok(d)
        }

        /// Retained node indices of every sparse CFG, keyed by `(proc, symbol)`.
        fn retained(&self) -> BTreeMap<(String, String), Vec<u32>> {
            let program = self.graph.program();
            self.run
                .retained()
                .into_iter()
                .map(|((p, sym), nodes)| ((program.procedure(p).name.clone(), sym.to_string()), nodes))
                .collect()
        }
    }

    /// Runs one solver over `program`.
    #[pyfunction]
    #[pyo3(signature = (program, client = "lcp", mode = "sparse"))]
    fn analyze(program: &Program, client: &str, mode: &str) -> PyResult<Analysis> {
        let c = self::client(client)?;
        let m = self::mode(mode)?;
        let run = analysis::run(&program.graph, c, m).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
        Ok(Analysis {
            graph: program.graph.clone(),
            run,
        })
    }

    /// Dense versus sparse: verdict, propagation counts and mismatches as
    /// `(proc, stmt, symbol, dense, sparse)`.
    #[pyfunction]
    #[pyo3(signature = (program, client = "lcp"))]
    fn compare<'py>(py: Python<'py>, program: &Program, client: &str) -> PyResult<Bound<'py, PyDict>> {
        let c = self::client(client)?;
        let solve = |m| analysis::run(&program.graph, c, m).map_err(|e| PyRuntimeError::new_err(e.to_string()));
        let dense = solve(Mode::Dense)?;
        let sparse = solve(Mode::Sparse)?;
        let mismatches: Vec<(String, String, String, String, String)> = compare_values(&dense, &sparse)
            .into_iter()
            .map(|m| {
                let p = program.graph.program();
                (
                    p.procedure(m.node.proc).name.clone(),
                    p.node_label(m.node),
                    m.symbol.to_string(),
                    m.left.to_string(),
                    m.right.to_string(),
                )
            })
            .collect();
        let d = PyDict::new(py);
        d.set_item("equal", mismatches.is_empty())?;
        d.set_item("dense_propagations", dense.stats.propagations)?;
        d.set_item("sparse_propagations", sparse.stats.propagations)?;
        d.set_item("mismatches", mismatches)?;
        Ok(d)
    }

    /// IR text of a synthetic program.
    #[pyfunction]
    #[pyo3(signature = (procs = 10, stmts = 100, rho = 0.5, seed = 7, depth = 3, branch_density = 0.02, field_density = 0.01, calls = 2))]
    #[allow(clippy::too_many_arguments)]
    fn generate(
        procs: usize,
        stmts: usize,
        rho: f64,
        seed: u64,
        depth: usize,
        branch_density: f64,
        field_density: f64,
        calls: usize,
    ) -> PyResult<String> {
        let params = GeneratorParams {
            procs,
            stmts_per_proc: stmts,
            rho,
            depth,
            branch_density,
            field_density,
            calls_per_proc: calls,
            seed,
        };
        bench::generate_source(&params).map_err(value_err)
    }

    /// The benchmark corpus as `(id, source)` pairs.
    #[pyfunction]
    fn corpus() -> Vec<(String, String)> {
        bench::corpus().iter().map(|c| (c.id(), c.source.to_string())).collect()
    }
}
