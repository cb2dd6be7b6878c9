use std::borrow::Cow;
use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;

use rustc_hash::FxHashMap;

use super::alias::AliasAnalysis;
use super::edge::LcpEdge;
use crate::ir::{CallSite, NodeId, Place, ProcId, Program, StmtKind, Supergraph};
use crate::lattice::LatticeValue;
use crate::solver::{identity_flow_into, Fact, FlowOut, IdeProblem};

/// Name of the synthetic local that carries a procedure's return value.
pub const RETURN_LOCAL: &str = "$ret";

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    Lambda,
    Local { proc: ProcId, name: String },
    Field { proc: ProcId, base: String, field: String },
    Static { class: String, field: String },
    Array { proc: ProcId, base: String, index: i64 },
}

impl Symbol {
    pub fn is_heap(&self) -> bool {
        matches!(self, Symbol::Field { .. } | Symbol::Static { .. } | Symbol::Array { .. })
    }

    pub fn proc(&self) -> Option<ProcId> {
        match self {
            Symbol::Local { proc, .. } | Symbol::Field { proc, .. } | Symbol::Array { proc, .. } => Some(*proc),
            Symbol::Lambda | Symbol::Static { .. } => None,
        }
    }

    pub fn place(&self) -> Option<Place> {
        Some(match self {
            Symbol::Lambda => return None,
            Symbol::Local { name, .. } => Place::Local(name.clone()),
            Symbol::Field { base, field, .. } => Place::Field(base.clone(), field.clone()),
            Symbol::Static { class, field } => Place::Static(class.clone(), field.clone()),
            Symbol::Array { base, index, .. } => Place::Array(base.clone(), *index),
        })
    }

    pub fn from_place(proc: ProcId, place: &Place) -> Symbol {
        match place {
            Place::Local(name) => Symbol::Local {
                proc,
                name: name.clone(),
            },
            Place::Field(base, field) => Symbol::Field {
                proc,
                base: base.clone(),
                field: field.clone(),
            },
            Place::Static(class, field) => Symbol::Static {
                class: class.clone(),
                field: field.clone(),
            },
            Place::Array(base, index) => Symbol::Array {
                proc,
                base: base.clone(),
                index: *index,
            },
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.place() {
            Some(place) => write!(f, "{place}"),
            None => write!(f, "Λ"),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct SymInfo {
    /// Base local of a field or array cell.
    base: Option<Fact>,
    is_static: bool,
}

#[derive(Debug, Default)]
struct Interner {
    symbols: Vec<Symbol>,
    info: Vec<SymInfo>,
    ids: HashMap<Symbol, Fact>,
}

impl Interner {
    fn new() -> Self {
        let mut i = Interner::default();
        i.intern(Symbol::Lambda);
        i
    }

    fn intern(&mut self, sym: Symbol) -> Fact {
        if let Some(&f) = self.ids.get(&sym) {
            return f;
        }
        let base = match &sym {
            Symbol::Field { proc, base, .. } | Symbol::Array { proc, base, .. } => Some(self.intern(Symbol::Local {
                proc: *proc,
                name: base.clone(),
            })),
            _ => None,
        };
        let fact = Fact(self.symbols.len() as u32);
        self.info.push(SymInfo {
            base,
            is_static: matches!(sym, Symbol::Static { .. }),
        });
        self.symbols.push(sym.clone());
        self.ids.insert(sym, fact);
        fact
    }

    /// The same field or array cell, based on the local `new_base` instead.
    fn rebase(&mut self, d: Fact, new_base: Fact) -> Fact {
        let Symbol::Local { proc, name } = self.symbols[new_base.0 as usize].clone() else {
            unreachable!("bases are locals")
        };
        let sym = match &self.symbols[d.0 as usize] {
            Symbol::Field { field, .. } => Symbol::Field {
                proc,
                base: name,
                field: field.clone(),
            },
            Symbol::Array { index, .. } => Symbol::Array {
                proc,
                base: name,
                index: *index,
            },
            other => unreachable!("rebase of {other:?}"),
        };
        self.intern(sym)
    }
}

#[derive(Debug, Clone)]
struct CallInfo {
    args: Vec<Fact>,
    params: Vec<Fact>,
    target: Option<Fact>,
    callee_ret: Fact,
    /// Caller locals that may alias each argument (including the argument).
    arg_aliases: Vec<Vec<Fact>>,
}

/// Per-statement flow behaviour with symbols already interned.
#[derive(Debug, Clone)]
enum Op {
    Nop,
    /// `target := edge(source)`; `source` is `Λ` for constants and `None`
    /// for `new`. Assigning a local kills every access path based on it;
    /// copies also copy the access paths of the source.
    Assign {
        target: Fact,
        source: Option<Fact>,
        edge: LcpEdge,
        copy_paths: bool,
    },
    /// Strong update of every aliased location written by a store.
    Store { source: Fact, writes: Vec<Fact> },
    Call(CallInfo),
}

/// The four edge kinds of the exploded supergraph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    Normal,
    Call,
    Return,
    CallToReturn,
}

/// Linear constant propagation over a [`Supergraph`].
pub struct LcpProblem {
    interner: RefCell<Interner>,
    ops: Vec<Vec<Op>>,
    /// `(proc, key)` -> statement nodes mentioning symbols with that key.
    index: FxHashMap<(ProcId, Fact), Vec<u32>>,
    aliases: AliasAnalysis,
}

impl LcpProblem {
    pub fn new(graph: &Supergraph) -> LcpProblem {
        let program = graph.program();
        let aliases = AliasAnalysis::compute(program);
        let mut interner = Interner::new();
        let mut ops = Vec::with_capacity(program.procedures.len());
        let mut alias_cache: HashMap<(ProcId, String), Vec<Fact>> = HashMap::new();

        for pid in program.proc_ids() {
            let proc = program.procedure(pid);
            let local = |interner: &mut Interner, name: &str| {
                interner.intern(Symbol::Local {
                    proc: pid,
                    name: name.to_string(),
                })
            };
            for name in proc.locals() {
                local(&mut interner, &name);
            }
            let ret = local(&mut interner, RETURN_LOCAL);
            let mut aliases_of = |interner: &mut Interner, name: &str| -> Vec<Fact> {
                alias_cache
                    .entry((pid, name.to_string()))
                    .or_insert_with(|| {
                        aliases
                            .aliases_in(pid, name)
                            .iter()
                            .map(|n| {
                                interner.intern(Symbol::Local {
                                    proc: pid,
                                    name: n.clone(),
                                })
                            })
                            .collect()
                    })
                    .clone()
            };

            let mut proc_ops = vec![Op::Nop];
            for stmt in &proc.body {
                use StmtKind::*;
                let op = match &stmt.kind {
                    ConstAssign { target, value } => Op::Assign {
                        target: local(&mut interner, target),
                        source: Some(Fact::LAMBDA),
                        edge: LcpEdge::Constant(*value),
                        copy_paths: false,
                    },
                    Binop {
                        target,
                        source,
                        op,
                        operand,
                    } => Op::Assign {
                        target: local(&mut interner, target),
                        source: Some(local(&mut interner, source)),
                        edge: LcpEdge::for_binop(*op, *operand),
                        copy_paths: false,
                    },
                    Copy { target, source } => Op::Assign {
                        target: local(&mut interner, target),
                        source: Some(local(&mut interner, source)),
                        edge: LcpEdge::Identity,
                        copy_paths: true,
                    },
                    FieldLoad { target, base, field } => Op::Assign {
                        target: local(&mut interner, target),
                        source: Some(interner.intern(Symbol::Field {
                            proc: pid,
                            base: base.clone(),
                            field: field.clone(),
                        })),
                        edge: LcpEdge::Identity,
                        copy_paths: false,
                    },
                    StaticLoad { target, class, field } => Op::Assign {
                        target: local(&mut interner, target),
                        source: Some(interner.intern(Symbol::Static {
                            class: class.clone(),
                            field: field.clone(),
                        })),
                        edge: LcpEdge::Identity,
                        copy_paths: false,
                    },
                    ArrayLoad { target, base, index } => Op::Assign {
                        target: local(&mut interner, target),
                        source: Some(interner.intern(Symbol::Array {
                            proc: pid,
                            base: base.clone(),
                            index: *index,
                        })),
                        edge: LcpEdge::Identity,
                        copy_paths: false,
                    },
                    New { target } => Op::Assign {
                        target: local(&mut interner, target),
                        source: None,
                        edge: LcpEdge::AllTop,
                        copy_paths: false,
                    },
                    FieldStore { base, field, source } => {
                        let writes = aliases_of(&mut interner, base)
                            .into_iter()
                            .map(|b| {
                                let Symbol::Local { name, .. } = interner.symbols[b.0 as usize].clone() else {
                                    unreachable!()
                                };
                                interner.intern(Symbol::Field {
                                    proc: pid,
                                    base: name,
                                    field: field.clone(),
                                })
                            })
                            .collect();
                        Op::Store {
                            source: local(&mut interner, source),
                            writes,
                        }
                    }
                    ArrayStore { base, index, source } => {
                        let writes = aliases_of(&mut interner, base)
                            .into_iter()
                            .map(|b| {
                                let Symbol::Local { name, .. } = interner.symbols[b.0 as usize].clone() else {
                                    unreachable!()
                                };
                                interner.intern(Symbol::Array {
                                    proc: pid,
                                    base: name,
                                    index: *index,
                                })
                            })
                            .collect();
                        Op::Store {
                            source: local(&mut interner, source),
                            writes,
                        }
                    }
                    StaticStore { class, field, source } => Op::Store {
                        source: local(&mut interner, source),
                        writes: vec![interner.intern(Symbol::Static {
                            class: class.clone(),
                            field: field.clone(),
                        })],
                    },
                    Return { value: Some(v) } => Op::Assign {
                        target: ret,
                        source: Some(local(&mut interner, v)),
                        edge: LcpEdge::Identity,
                        copy_paths: true,
                    },
                    Call { target, callee, args } => {
                        let q = program.proc_id(callee).expect("resolved callee");
                        let callee_proc = program.procedure(q);
                        let params = callee_proc
                            .params
                            .iter()
                            .map(|p| {
                                interner.intern(Symbol::Local {
                                    proc: q,
                                    name: p.clone(),
                                })
                            })
                            .collect();
                        let callee_ret = interner.intern(Symbol::Local {
                            proc: q,
                            name: RETURN_LOCAL.into(),
                        });
                        Op::Call(CallInfo {
                            args: args.iter().map(|a| local(&mut interner, a)).collect(),
                            params,
                            target: target.as_ref().map(|t| local(&mut interner, t)),
                            callee_ret,
                            arg_aliases: args.iter().map(|a| aliases_of(&mut interner, a)).collect(),
                        })
                    }
                    Return { value: None } | Branch { .. } | Goto { .. } | Label { .. } => Op::Nop,
                };
                proc_ops.push(op);
            }
            proc_ops.push(Op::Nop);
            ops.push(proc_ops);
        }

        let mut problem = LcpProblem {
            interner: RefCell::new(interner),
            ops,
            index: FxHashMap::default(),
            aliases,
        };
        problem.build_index();
        problem
    }

    fn build_index(&mut self) {
        let mut index: FxHashMap<(ProcId, Fact), Vec<u32>> = FxHashMap::default();
        for (p, proc_ops) in self.ops.iter().enumerate() {
            let pid = ProcId(p as u32);
            for (node, op) in proc_ops.iter().enumerate() {
                let mut keys = Vec::new();
                match op {
                    Op::Nop => {}
                    Op::Assign { target, source, .. } => {
                        keys.push(*target);
                        keys.extend(source.iter().copied());
                    }
                    Op::Store { source, writes } => {
                        keys.push(*source);
                        keys.extend(writes.iter().copied());
                    }
                    Op::Call(info) => {
                        keys.push(Fact::LAMBDA);
                        keys.extend(info.args.iter().copied());
                        keys.extend(info.target);
                        keys.extend(info.arg_aliases.iter().flatten().copied());
                    }
                }
                let mut keys: Vec<Fact> = keys.into_iter().map(|k| self.key(k)).collect();
                keys.sort();
                keys.dedup();
                for k in keys {
                    index.entry((pid, k)).or_default().push(node as u32);
                }
            }
        }
        self.index = index;
    }

    /// Index key: the base local for fields and array cells, else the fact itself.
    fn key(&self, d: Fact) -> Fact {
        self.info(d).base.unwrap_or(d)
    }

    fn info(&self, d: Fact) -> SymInfo {
        self.interner.borrow().info[d.0 as usize]
    }

    fn base(&self, d: Fact) -> Option<Fact> {
        self.info(d).base
    }

    fn rebase(&self, d: Fact, new_base: Fact) -> Fact {
        self.interner.borrow_mut().rebase(d, new_base)
    }

    fn op(&self, node: NodeId) -> &Op {
        &self.ops[node.proc.0 as usize][node.index as usize]
    }

    fn call_info(&self, site: &CallSite) -> &CallInfo {
        match self.op(site.call) {
            Op::Call(info) => info,
            other => unreachable!("call site without call op: {other:?}"),
        }
    }

    pub fn symbol(&self, d: Fact) -> Symbol {
        self.interner.borrow().symbols[d.0 as usize].clone()
    }

    /// Looks up (interning on first use) the fact for `place` in `proc`.
    pub fn fact(&self, proc: ProcId, place: &Place) -> Fact {
        self.interner.borrow_mut().intern(Symbol::from_place(proc, place))
    }

    pub fn lookup(&self, sym: &Symbol) -> Option<Fact> {
        self.interner.borrow().ids.get(sym).copied()
    }

    /// Every fact interned so far.
    pub fn facts(&self) -> Vec<Fact> {
        (0..self.interner.borrow().symbols.len() as u32).map(Fact).collect()
    }

    pub fn alias_analysis(&self) -> &AliasAnalysis {
        &self.aliases
    }

    /// True for statements that generate facts from `Λ` (constant assignments).
    pub fn is_generator(&self, node: NodeId) -> bool {
        matches!(self.op(node), Op::Assign { source: Some(s), .. } if s.is_lambda())
    }

    /// True for nodes whose op is a plain assignment or no-op.
    pub(crate) fn is_assignment(&self, node: NodeId) -> bool {
        matches!(self.op(node), Op::Nop | Op::Assign { .. })
    }

    /// For a no-op or assignment: the flow of `d` targets exactly `{d}`,
    /// whatever the edge. Matches `normal_flow` without building it.
    pub(crate) fn flows_only_to_self(&self, node: NodeId, d: Fact) -> bool {
        match self.op(node) {
            Op::Nop => true,
            Op::Assign {
                target,
                source,
                copy_paths,
                ..
            } => {
                if d.is_lambda() {
                    return *source != Some(Fact::LAMBDA);
                }
                let base = self.base(d);
                let keep = d != *target && base != Some(*target);
                let gen = *source == Some(d);
                let copy = *copy_paths && base.is_some() && base == *source;
                (keep || gen || copy) && (!gen || *target == d) && (!copy || base == Some(*target))
            }
            _ => false,
        }
    }

    pub(crate) fn is_const_assign_target(&self, node: NodeId, d: Fact) -> bool {
        match self.op(node) {
            Op::Assign {
                target,
                source: Some(s),
                ..
            } if s.is_lambda() => d == *target || self.base(d) == Some(*target),
            _ => false,
        }
    }

    pub(crate) fn candidate_nodes(&self, proc: ProcId, d: Fact) -> &[u32] {
        self.index.get(&(proc, self.key(d))).map_or(&[], Vec::as_slice)
    }

    /// Sorted nodes that may be relevant for `d`: indexed statements plus,
    /// for statics, every call.
    pub(crate) fn candidates(&self, proc: ProcId, d: Fact) -> Cow<'_, [u32]> {
        let indexed = self.candidate_nodes(proc, d);
        if !self.info(d).is_static {
            return Cow::Borrowed(indexed);
        }
        let mut all: Vec<u32> = indexed.iter().copied().chain(self.static_candidates(proc, d)).collect();
        all.sort_unstable();
        all.dedup();
        Cow::Owned(all)
    }

    /// Statics cross every call, so every call is a candidate for them.
    pub(crate) fn static_candidates(&self, proc: ProcId, d: Fact) -> impl Iterator<Item = u32> + '_ {
        let calls: &[Op] = if self.info(d).is_static { &self.ops[proc.0 as usize] } else { &[] };
        calls
            .iter()
            .enumerate()
            .filter(|(_, op)| matches!(op, Op::Call(_)))
            .map(|(i, _)| i as u32)
    }

    /// Target facts of `d` across one edge of the given kind. For `Return`,
    /// `node` is the call site and `d` a fact at the callee exit.
    pub fn flow_function(&self, graph: &Supergraph, kind: EdgeKind, node: NodeId, d: Fact) -> Vec<Fact> {
        self.flows(graph, kind, node, d).into_iter().map(|(f, _)| f).collect()
    }

    /// Edge function on the exploded edge `d_in -> d_out`; `AllTop` if the
    /// flow function has no such edge.
    pub fn edge_function(&self, graph: &Supergraph, kind: EdgeKind, node: NodeId, d_in: Fact, d_out: Fact) -> LcpEdge {
        self.flows(graph, kind, node, d_in)
            .into_iter()
            .filter(|(f, _)| *f == d_out)
            .map(|(_, e)| e)
            .fold(LcpEdge::AllTop, |a, b| super::meet_edge(&a, &b))
    }

    fn flows(&self, graph: &Supergraph, kind: EdgeKind, node: NodeId, d: Fact) -> FlowOut<LcpEdge> {
        let mut out = Vec::new();
        let site = || graph.call_site(node).expect("call edge kinds need a call node");
        match kind {
            EdgeKind::Normal => self.normal_flow(node, d, &mut out),
            EdgeKind::Call => self.call_flow(site(), d, &mut out),
            EdgeKind::Return => self.return_flow(site(), d, &mut out),
            EdgeKind::CallToReturn => self.call_to_return_flow(site(), d, &mut out),
        }
        out
    }

    /// Facts of `proc` (locals, fields, array cells) plus statics.
    pub fn facts_of(&self, proc: ProcId) -> Vec<Fact> {
        let interner = self.interner.borrow();
        interner
            .symbols
            .iter()
            .enumerate()
            .filter(|(_, s)| match s {
                Symbol::Static { .. } => true,
                s => s.proc() == Some(proc),
            })
            .map(|(i, _)| Fact(i as u32))
            .collect()
    }

    pub fn program_statement_count(program: &Program) -> usize {
        program.statement_count()
    }
}

const ID: LcpEdge = LcpEdge::Identity;

impl IdeProblem for LcpProblem {
    type Value = LatticeValue;
    type EdgeFn = LcpEdge;

    fn top(&self) -> LatticeValue {
        LatticeValue::Top
    }

    fn bottom(&self) -> LatticeValue {
        LatticeValue::Bottom
    }

    fn meet_value(&self, a: &LatticeValue, b: &LatticeValue) -> LatticeValue {
        a.meet(*b)
    }

    fn chain_height(&self) -> usize {
        3
    }

    fn normal_flow(&self, node: NodeId, d: Fact, out: &mut FlowOut<LcpEdge>) {
        match self.op(node) {
            Op::Nop | Op::Call(_) => out.push((d, ID)),
            Op::Assign {
                target,
                source,
                edge,
                copy_paths,
            } => {
                if d.is_lambda() {
                    out.push((d, ID));
                    if *source == Some(Fact::LAMBDA) {
                        out.push((*target, *edge));
                    }
                    return;
                }
                let base = self.base(d);
                if d != *target && base != Some(*target) {
                    out.push((d, ID));
                }
                if *source == Some(d) {
                    out.push((*target, *edge));
                }
                if *copy_paths && base.is_some() && base == *source {
                    out.push((self.rebase(d, *target), ID));
                }
            }
            Op::Store { source, writes } => {
                if !writes.contains(&d) {
                    out.push((d, ID));
                }
                if d == *source {
                    out.extend(writes.iter().map(|&w| (w, ID)));
                }
            }
        }
    }

    fn call_flow(&self, site: &CallSite, d: Fact, out: &mut FlowOut<LcpEdge>) {
        if d.is_lambda() {
            out.push((d, ID));
            return;
        }
        let info = self.call_info(site);
        let sym = self.info(d);
        if sym.is_static {
            out.push((d, ID));
        } else if let Some(base) = sym.base {
            for (i, aliases) in info.arg_aliases.iter().enumerate() {
                if aliases.contains(&base) {
                    out.push((self.rebase(d, info.params[i]), ID));
                }
            }
        } else {
            for (i, &arg) in info.args.iter().enumerate() {
                if arg == d {
                    out.push((info.params[i], ID));
                }
            }
        }
    }

    fn return_flow(&self, site: &CallSite, d: Fact, out: &mut FlowOut<LcpEdge>) {
        if d.is_lambda() {
            out.push((d, ID));
            return;
        }
        let info = self.call_info(site);
        let sym = self.info(d);
        if sym.is_static {
            out.push((d, ID));
        } else if d == info.callee_ret {
            out.extend(info.target.map(|t| (t, ID)));
        } else if let Some(base) = sym.base {
            if base == info.callee_ret {
                if let Some(t) = info.target {
                    out.push((self.rebase(d, t), ID));
                }
            }
            for (i, &param) in info.params.iter().enumerate() {
                if param == base {
                    for &q in &info.arg_aliases[i] {
                        out.push((self.rebase(d, q), ID));
                    }
                }
            }
        }
    }

    fn call_to_return_flow(&self, site: &CallSite, d: Fact, out: &mut FlowOut<LcpEdge>) {
        if d.is_lambda() {
            out.push((d, ID));
            return;
        }
        let info = self.call_info(site);
        let sym = self.info(d);
        let killed = sym.is_static
            || info.target.is_some_and(|t| d == t || sym.base == Some(t))
            || sym.base.is_some_and(|b| info.arg_aliases.iter().any(|a| a.contains(&b)));
        if !killed {
            out.push((d, ID));
        }
    }

    fn is_heap(&self, d: Fact) -> bool {
        let info = self.info(d);
        info.is_static || info.base.is_some()
    }

    fn fact_name(&self, d: Fact) -> String {
        self.symbol(d).to_string()
    }

    fn is_identity_transformer(&self, graph: &Supergraph, node: NodeId, d: Fact) -> bool {
        match self.op(node) {
            Op::Nop => true,
            Op::Assign {
                target,
                source,
                edge,
                copy_paths,
            } => {
                if d.is_lambda() {
                    return *source != Some(Fact::LAMBDA);
                }
                let base = self.base(d);
                let self_copy = *source == Some(*target) && *edge == ID;
                if d == *target || base == Some(*target) {
                    return self_copy;
                }
                if *source == Some(d) {
                    return false;
                }
                !(*copy_paths && base.is_some() && base == *source)
            }
            Op::Store { source, writes } => d != *source && !writes.contains(&d),
            Op::Call(_) => {
                let site = graph.call_site(node).expect("call site");
                let mut out = Vec::new();
                self.call_flow(site, d, &mut out);
                if !out.is_empty() {
                    return false;
                }
                self.call_to_return_flow(site, d, &mut out);
                out == [(d, ID)]
            }
        }
    }

    fn relevant_nodes(&self, graph: &Supergraph, proc: ProcId, d: Fact) -> Vec<u32> {
        let mut buf = Vec::new();
        self.candidates(proc, d)
            .iter()
            .copied()
            .filter(|&i| {
                let node = NodeId::new(proc, i);
                // For assignments the two identity conditions coincide; the
                // transformer check avoids building the flow.
                if self.is_assignment(node) {
                    return !self.is_identity_transformer(graph, node, d);
                }
                if !identity_flow_into(self, graph, node, d, &mut buf) {
                    return true;
                }
                // At calls the transformer is the call-to-return edge just computed.
                match self.op(node) {
                    Op::Call(_) => buf[0].1 != ID,
                    _ => !self.is_identity_transformer(graph, node, d),
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::parse_program;

    struct Fixture {
        graph: Supergraph,
        problem: LcpProblem,
    }

    impl Fixture {
        fn new(src: &str) -> Fixture {
            let graph = Supergraph::new(parse_program(src).unwrap(), &["main"]).unwrap();
            let problem = LcpProblem::new(&graph);
            Fixture { graph, problem }
        }

        fn main(src: &str) -> Fixture {
            Fixture::new(&format!("proc main() {{\n{src}\n}}"))
        }

        fn node(&self, proc: &str, i: u32) -> NodeId {
            NodeId::new(self.graph.program().proc_id(proc).unwrap(), i)
        }

        fn fact(&self, proc: &str, place: &str) -> Fact {
            let p = self.graph.program().proc_id(proc).unwrap();
            self.problem.fact(p, &Place::parse(place).unwrap())
        }

        fn names(&self, facts: Vec<Fact>) -> Vec<String> {
            let mut out: Vec<String> = facts.into_iter().map(|f| self.problem.fact_name(f)).collect();
            out.sort();
            out
        }

        fn flow(&self, kind: EdgeKind, proc: &str, i: u32, d: Fact) -> Vec<String> {
            self.names(self.problem.flow_function(&self.graph, kind, self.node(proc, i), d))
        }
    }

    #[test]
    fn local_copy_rows() {
        let f = Fixture::main("b = a");
        let (a, b) = (f.fact("main", "a"), f.fact("main", "b"));
        assert_eq!(f.flow(EdgeKind::Normal, "main", 1, a), vec!["a", "b"]);
        assert!(f.flow(EdgeKind::Normal, "main", 1, b).is_empty());
        let e = f.problem.edge_function(&f.graph, EdgeKind::Normal, f.node("main", 1), a, b);
        assert_eq!(e, LcpEdge::Identity);
    }

    #[test]
    fn constant_and_binop_edges() {
        let f = Fixture::main("a = 3\nc = b + 1\nd = b * 2\ne = b - 4\ng = b / 2");
        let n = |i| f.node("main", i);
        let (a, b) = (f.fact("main", "a"), f.fact("main", "b"));
        assert_eq!(
            f.problem.edge_function(&f.graph, EdgeKind::Normal, n(1), Fact::LAMBDA, a),
            LcpEdge::Constant(3)
        );
        assert_eq!(f.flow(EdgeKind::Normal, "main", 1, Fact::LAMBDA), vec!["a", "Λ"]);
        assert!(f.flow(EdgeKind::Normal, "main", 1, a).is_empty());
        let edge = |i, t: &str| f.problem.edge_function(&f.graph, EdgeKind::Normal, n(i), b, f.fact("main", t));
        assert_eq!(edge(2, "c"), LcpEdge::Linear { m: 1, b: 1 });
        assert_eq!(edge(3, "d"), LcpEdge::Linear { m: 2, b: 0 });
        assert_eq!(edge(4, "e"), LcpEdge::Linear { m: 1, b: -4 });
        assert_eq!(edge(5, "g"), LcpEdge::Div(2));
        assert_eq!(edge(2, "d"), LcpEdge::AllTop);
    }

    #[test]
    fn load_and_store_rows() {
        let f = Fixture::main("x = new\ny = x\ny.f = v\nz = x.f\n@C.s = z\nw = @C.s\nx[1] = w\nq = x[1]");
        let v = f.fact("main", "v");
        assert_eq!(f.flow(EdgeKind::Normal, "main", 3, v), vec!["v", "x.f", "y.f"]);
        let xf = f.fact("main", "x.f");
        assert_eq!(
            f.problem.edge_function(&f.graph, EdgeKind::Normal, f.node("main", 3), v, xf),
            LcpEdge::Identity
        );
        // Strong update: the old value of an aliased field is killed.
        assert!(f.flow(EdgeKind::Normal, "main", 3, xf).is_empty());
        assert_eq!(f.flow(EdgeKind::Normal, "main", 4, xf), vec!["x.f", "z"]);
        let z = f.fact("main", "z");
        assert_eq!(f.flow(EdgeKind::Normal, "main", 5, z), vec!["@C.s", "z"]);
        assert_eq!(f.flow(EdgeKind::Normal, "main", 6, f.fact("main", "@C.s")), vec!["@C.s", "w"]);
        assert_eq!(f.flow(EdgeKind::Normal, "main", 7, f.fact("main", "w")), vec!["w", "x[1]", "y[1]"]);
        assert_eq!(f.flow(EdgeKind::Normal, "main", 8, f.fact("main", "x[1]")), vec!["q", "x[1]"]);
    }

    #[test]
    fn assignment_kills_access_paths() {
        let f = Fixture::main("x = new\nx.f = v\nx = new\ny = x");
        let xf = f.fact("main", "x.f");
        assert!(f.flow(EdgeKind::Normal, "main", 3, xf).is_empty());
        assert_eq!(f.flow(EdgeKind::Normal, "main", 4, xf), vec!["x.f", "y.f"]);
    }

    #[test]
    fn call_rows() {
        let f = Fixture::new(
            "proc f(p) {\n  p.g = p\n  return p\n}\nproc main() {\n  a = 1\n  o = new\n  r = call f(a)\n  call f(o)\n}",
        );
        let a = f.fact("main", "a");
        let r = f.fact("main", "r");
        assert_eq!(f.flow(EdgeKind::Call, "main", 3, a), vec!["p"]);
        assert_eq!(f.flow(EdgeKind::Call, "main", 3, Fact::LAMBDA), vec!["Λ"]);
        assert!(f.flow(EdgeKind::Call, "main", 3, r).is_empty());
        // Locals are passed by value, so the actual survives the call.
        assert_eq!(f.flow(EdgeKind::CallToReturn, "main", 3, a), vec!["a"]);
        assert!(f.flow(EdgeKind::CallToReturn, "main", 3, r).is_empty());
        let ret = f.fact("f", "$ret");
        assert_eq!(f.flow(EdgeKind::Return, "main", 3, ret), vec!["r"]);
        assert!(f.flow(EdgeKind::Return, "main", 3, f.fact("f", "p")).is_empty());
        // Fields reachable from an argument travel both ways.
        let of = f.fact("main", "o.g");
        assert_eq!(f.flow(EdgeKind::Call, "main", 4, of), vec!["p.g"]);
        assert!(f.flow(EdgeKind::CallToReturn, "main", 4, of).is_empty());
        // `r` may alias `o` through `f`'s return, context-insensitively.
        assert_eq!(f.flow(EdgeKind::Return, "main", 4, f.fact("f", "p.g")), vec!["o.g", "r.g"]);
        let s = f.fact("main", "@K.s");
        assert_eq!(f.flow(EdgeKind::Call, "main", 4, s), vec!["@K.s"]);
        assert!(f.flow(EdgeKind::CallToReturn, "main", 4, s).is_empty());
        assert_eq!(
            f.problem.edge_function(&f.graph, EdgeKind::CallToReturn, f.node("main", 3), a, a),
            LcpEdge::Identity
        );
    }

    #[test]
    fn identity_predicates() {
        let f = Fixture::main("a = 3\nb = a\nc = 7\nb = b + 1\nd = a * 2\na = a");
        let g = &f.graph;
        let n = |i| f.node("main", i);
        let (a, b) = (f.fact("main", "a"), f.fact("main", "b"));
        let flow = |i, d| f.problem.is_identity_flow(g, n(i), d);
        let trans = |i, d| f.problem.is_identity_transformer(g, n(i), d);
        assert!(flow(3, a) && trans(3, a));
        assert!(!flow(2, a) && !trans(2, a));
        assert!(!flow(1, a) && !trans(1, a));
        assert!(flow(4, b) && !trans(4, b));
        assert!(!trans(5, a));
        assert!(!flow(1, Fact::LAMBDA));
        assert!(flow(2, Fact::LAMBDA) && trans(2, Fact::LAMBDA));
        assert!(flow(6, a) && trans(6, a));
        let relevant = f.problem.relevant_nodes(g, n(0).proc, a);
        assert_eq!(relevant, vec![1, 2, 5]);
        let relevant = f.problem.relevant_nodes(g, n(0).proc, Fact::LAMBDA);
        assert_eq!(relevant, vec![1, 3]);
    }

    #[test]
    fn relevance_index_matches_full_scan() {
        let f = Fixture::new(
            "proc f(p) {\n  p.g = p\n  return p\n}\nproc main() {\n  a = 1\n  o = new\n  q = o\n  o.g = a\n  r = call f(a)\n  call f(o)\n  s = q.g\n  @C.x = s\n  o[0] = s\n  t = q[0]\n}",
        );
        let g = &f.graph;
        for proc in g.program().proc_ids() {
            for d in f.problem.facts() {
                let exit = g.procedure(proc).exit();
                let scan: Vec<u32> = (1..exit)
                    .filter(|&i| {
                        let node = NodeId::new(proc, i);
                        !(f.problem.is_identity_flow(g, node, d) && f.problem.is_identity_transformer(g, node, d))
                    })
                    .collect();
                assert_eq!(f.problem.relevant_nodes(g, proc, d), scan, "{}", f.problem.fact_name(d));
            }
        }
    }

    #[test]
    fn relevance_shortcuts_match_full_scan_for_both_clients() {
        let f = Fixture::new(
            "proc main() {\n  a = 1\n  a = a + 1\n  a = a\n  o = new\n  o.f = a\n  o = o\n  q = o\n  b = q.f\n  o = 3\n  b = b * 2\n  @C.x = b\n  c = @C.x\n}",
        );
        let g = &f.graph;
        let taint = super::super::taint::TaintProblem::new(g);
        let main = g.program().proc_id("main").unwrap();
        let exit = g.procedure(main).exit();
        // Intern every access path first so both problems see the same facts.
        for d in f.problem.facts() {
            for i in 1..exit {
                f.problem.normal_flow(NodeId::new(main, i), d, &mut Vec::new());
            }
        }
        for d in f.problem.facts() {
            let lcp: Vec<u32> = (1..exit)
                .filter(|&i| {
                    let node = NodeId::new(main, i);
                    !(f.problem.is_identity_flow(g, node, d) && f.problem.is_identity_transformer(g, node, d))
                })
                .collect();
            assert_eq!(f.problem.relevant_nodes(g, main, d), lcp, "lcp {}", f.problem.fact_name(d));
            let Some(td) = taint.facts().lookup(&f.problem.symbol(d)) else { continue };
            let scan: Vec<u32> = (1..exit).filter(|&i| !taint.is_identity_flow(g, NodeId::new(main, i), td)).collect();
            assert_eq!(taint.relevant_nodes(g, main, td), scan, "taint {}", f.problem.fact_name(d));
        }
    }
}
