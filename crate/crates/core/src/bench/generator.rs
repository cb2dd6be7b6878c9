//! Synthetic stress programs with a tunable share of irrelevant statements.
//!
//! Every procedure threads one queried local `v` through mostly constant
//! assignments, occasional updates, calls and field round trips. A
//! fraction `rho` of the statements instead shuffle a pool of decoy locals
//! that never receive a constant, so they carry no facts and leave every
//! live fact untouched. Procedures form call-graph layers below `main`;
//! forward branches add merges without loops.

use std::fmt::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ir::{parse_program, Place, Program};

const DECOYS: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorParams {
    pub procs: usize,
    pub stmts_per_proc: usize,
    /// Fraction of statements that only touch decoy locals.
    pub rho: f64,
    /// Number of call-graph layers below `main`.
    pub depth: usize,
    /// Probability that a statement slot opens a forward branch.
    pub branch_density: f64,
    /// Probability that a live slot is a field store/load round trip.
    pub field_density: f64,
    /// Calls per procedure into the next layer.
    pub calls_per_proc: usize,
    pub seed: u64,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            procs: 10,
            stmts_per_proc: 100,
            rho: 0.5,
            depth: 3,
            branch_density: 0.02,
            field_density: 0.01,
            calls_per_proc: 2,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid generator parameters: {0}")]
pub struct GenError(pub String);

impl GeneratorParams {
    pub fn validate(&self) -> Result<(), GenError> {
        let fraction = |name: &str, x: f64| {
            if (0.0..=1.0).contains(&x) {
                Ok(())
            } else {
                Err(GenError(format!("{name} must be in [0, 1], got {x}")))
            }
        };
        fraction("rho", self.rho)?;
        fraction("branch density", self.branch_density)?;
        fraction("field density", self.field_density)?;
        if self.procs == 0 {
            return Err(GenError("at least one procedure is required".into()));
        }
        if self.stmts_per_proc < 4 {
            return Err(GenError("at least 4 statements per procedure are required".into()));
        }
        Ok(())
    }
}

fn proc_name(i: usize) -> String {
    if i == 0 {
        "main".to_string()
    } else {
        format!("f{i}")
    }
}

/// Callees of every procedure. Each non-main procedure gets a parent in
/// the layer above it, so all procedures are reachable from `main`.
fn call_graph(params: &GeneratorParams, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let n = params.procs;
    let depth = params.depth.max(1);
    let layer = |i: usize| if i == 0 { 0 } else { 1 + (i - 1) * depth / (n - 1).max(1) };
    let mut by_layer: Vec<Vec<usize>> = vec![Vec::new(); depth + 1];
    for i in 0..n {
        by_layer[layer(i)].push(i);
    }
    let mut callees = vec![Vec::new(); n];
    for i in 1..n {
        // Fall back to an earlier non-empty layer when the one above is empty.
        let parents = (0..layer(i)).rev().map(|l| &by_layer[l]).find(|l| !l.is_empty());
        let parent = *parents.expect("main is in layer 0").choose(rng).expect("non-empty");
        callees[parent].push(i);
    }
    for (i, list) in callees.iter_mut().enumerate() {
        let below = by_layer.get(layer(i) + 1).filter(|l| !l.is_empty());
        while let Some(below) = below {
            if list.len() >= params.calls_per_proc {
                break;
            }
            list.push(*below.choose(rng).expect("non-empty"));
        }
    }
    callees
}

fn constant(rng: &mut ChaCha8Rng) -> i64 {
    rng.gen_range(0..100)
}

fn body(params: &GeneratorParams, callees: &[usize], rng: &mut ChaCha8Rng, out: &mut String) {
    let n = params.stmts_per_proc;
    let fields = params.field_density > 0.0;
    let mut emitted = 0usize;
    let line = |out: &mut String, s: String, emitted: &mut usize| {
        let _ = writeln!(out, "  {s}");
        *emitted += 1;
    };
    if fields {
        line(out, "o = new".into(), &mut emitted);
    }
    // Calls spread evenly over the body.
    let slots = n.saturating_sub(2).max(1);
    let call_at: Vec<usize> = (0..callees.len()).map(|k| 1 + (k + 1) * slots / (callees.len() + 1)).collect();
    let mut next_call = 0;
    let mut labels: Vec<(usize, usize)> = Vec::new();
    let mut label_id = 0usize;

    // Leave room for labels and calls still pending when the body ends.
    while emitted + labels.len() + (call_at.len() - next_call) < n - 1 {
        if let Some(pos) = labels.iter().position(|&(at, _)| at <= emitted) {
            let (_, id) = labels.remove(pos);
            let _ = writeln!(out, "L{id}:");
            emitted += 1;
            continue;
        }
        if next_call < call_at.len() && emitted >= call_at[next_call] {
            line(out, format!("v = call {}(v)", proc_name(callees[next_call])), &mut emitted);
            next_call += 1;
            continue;
        }
        if rng.gen_bool(params.branch_density) {
            let target = emitted + rng.gen_range(2..8);
            line(out, format!("if * goto L{label_id}"), &mut emitted);
            labels.push((target.min(n - 2), label_id));
            label_id += 1;
            continue;
        }
        if rng.gen_bool(params.rho) {
            let k = rng.gen_range(0..DECOYS);
            let j = rng.gen_range(0..DECOYS);
            let s = if rng.gen_bool(0.5) {
                format!("t{k} = t{j}")
            } else {
                format!("t{k} = t{j} + {}", constant(rng))
            };
            line(out, s, &mut emitted);
            continue;
        }
        // The fresh object ends the round trip so `o.f` does not stay live.
        if fields && rng.gen_bool(params.field_density) && emitted + 3 < n {
            line(out, "o.f = v".into(), &mut emitted);
            line(out, "v = o.f".into(), &mut emitted);
            line(out, "o = new".into(), &mut emitted);
            continue;
        }
        let s = match rng.gen_range(0..50) {
            0 => format!("v = v + {}", constant(rng)),
            1 => format!("v = v * {}", rng.gen_range(1..4)),
            _ => format!("v = {}", constant(rng)),
        };
        line(out, s, &mut emitted);
    }
    // Labels still pending land just before the return.
    for (_, id) in labels {
        let _ = writeln!(out, "L{id}:");
    }
    while next_call < call_at.len() {
        let _ = writeln!(out, "  v = call {}(v)", proc_name(callees[next_call]));
        next_call += 1;
    }
    let _ = writeln!(out, "  return v");
}

/// The IR text of a generated program; identical for identical params.
pub fn generate_source(params: &GeneratorParams) -> Result<String, GenError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let callees = call_graph(params, &mut rng);
    let mut out = String::new();
    // Callees first keeps the text readable top-down from leaves.
    for i in (0..params.procs).rev() {
        let header = if i == 0 {
            "proc main() {".to_string()
        } else {
            format!("proc {}(v) {{", proc_name(i))
        };
        out.push_str(&header);
        out.push('\n');
        body(params, &callees[i], &mut rng, &mut out);
        out.push_str("}\n");
        if i > 0 {
            out.push('\n');
        }
    }
    Ok(out)
}

pub fn generate_program(params: &GeneratorParams) -> Result<Program, GenError> {
    let src = generate_source(params)?;
    parse_program(&src).map_err(|e| GenError(format!("generated program does not parse: {e}")))
}

/// The queried symbols of a generated program: `v` at every exit.
pub fn generated_queries(params: &GeneratorParams) -> Vec<(String, String, Place)> {
    (0..params.procs)
        .map(|i| (proc_name(i), "exit".to_string(), Place::Local("v".into())))
        .collect()
}
