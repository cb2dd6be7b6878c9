//! Concrete all-paths interpreter used as an independent reference.
//!
//! Every branch is taken both ways, each complete path is executed on
//! concrete integers and objects, and the value of every place on entry
//! to every node is met across all paths. Never-assigned places are `⊤`;
//! overflow and division by zero produce an unknown value (`⊥`).

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::ir::{NodeId, Place, ProcId, Program, StmtKind};
use crate::lattice::LatticeValue;
use crate::lcp::RETURN_LOCAL;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("procedure `{0}` contains a loop")]
    Loop(String),
    #[error("call depth exceeds {0}")]
    DepthExceeded(usize),
    #[error("more than {0} paths")]
    TooManyPaths(usize),
    #[error("unknown entry procedure `{0}`")]
    UnknownEntry(String),
}

/// Values met over all paths, keyed by node and place; `⊤` entries omitted.
pub type OracleValues = BTreeMap<(NodeId, Place), LatticeValue>;

const MAX_PATHS: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Val {
    Undef,
    Int(i64),
    Unknown,
    Ref(usize),
}

impl Val {
    fn lattice(self) -> LatticeValue {
        match self {
            Val::Int(v) => LatticeValue::Const(v),
            Val::Unknown => LatticeValue::Bottom,
            Val::Undef | Val::Ref(_) => LatticeValue::Top,
        }
    }
}

#[derive(Debug, Clone)]
struct Frame {
    proc: ProcId,
    pc: u32,
    locals: HashMap<String, Val>,
}

#[derive(Debug, Clone)]
struct State {
    stack: Vec<Frame>,
    heap: HashMap<(usize, String), Val>,
    statics: HashMap<(String, String), Val>,
    next_obj: usize,
}

impl State {
    fn frame(&mut self) -> &mut Frame {
        self.stack.last_mut().expect("non-empty stack")
    }

    fn local(&self, name: &str) -> Val {
        let frame = self.stack.last().expect("non-empty stack");
        frame.locals.get(name).copied().unwrap_or(Val::Undef)
    }

    fn set(&mut self, name: &str, v: Val) {
        self.frame().locals.insert(name.to_string(), v);
    }

    fn cell(&self, base: &str, field: &str) -> Val {
        match self.local(base) {
            Val::Ref(o) => self.heap.get(&(o, field.to_string())).copied().unwrap_or(Val::Undef),
            _ => Val::Undef,
        }
    }

    fn store(&mut self, base: &str, field: &str, v: Val) {
        if let Val::Ref(o) = self.local(base) {
            self.heap.insert((o, field.to_string()), v);
        }
    }
}

fn array_field(index: i64) -> String {
    format!("[{index}]")
}

/// Every place worth reporting in each procedure.
fn places(program: &Program) -> Vec<Vec<Place>> {
    let mut fields = BTreeSet::new();
    let mut indices = BTreeSet::new();
    let mut statics = BTreeSet::new();
    for p in &program.procedures {
        for stmt in &p.body {
            match &stmt.kind {
                StmtKind::FieldLoad { field, .. } | StmtKind::FieldStore { field, .. } => {
                    fields.insert(field.clone());
                }
                StmtKind::ArrayLoad { index, .. } | StmtKind::ArrayStore { index, .. } => {
                    indices.insert(*index);
                }
                StmtKind::StaticLoad { class, field, .. } | StmtKind::StaticStore { class, field, .. } => {
                    statics.insert((class.clone(), field.clone()));
                }
                _ => {}
            }
        }
    }
    program
        .procedures
        .iter()
        .map(|p| {
            let mut locals = p.locals();
            locals.push(RETURN_LOCAL.to_string());
            let mut out: Vec<Place> = Vec::new();
            for l in &locals {
                out.push(Place::Local(l.clone()));
                out.extend(fields.iter().map(|f| Place::Field(l.clone(), f.clone())));
                out.extend(indices.iter().map(|&i| Place::Array(l.clone(), i)));
            }
            out.extend(statics.iter().map(|(c, f)| Place::Static(c.clone(), f.clone())));
            out
        })
        .collect()
}

fn read(state: &State, place: &Place) -> Val {
    match place {
        Place::Local(l) => state.local(l),
        Place::Field(b, f) => state.cell(b, f),
        Place::Array(b, i) => state.cell(b, &array_field(*i)),
        Place::Static(c, f) => state.statics.get(&(c.clone(), f.clone())).copied().unwrap_or(Val::Undef),
    }
}

/// Runs `entry` over all branch resolutions. Programs must be loop-free
/// and calls may nest at most `max_depth` deep.
pub fn oracle_interpret(program: &Program, entry: &str, max_depth: usize) -> Result<OracleValues, OracleError> {
    let entry_id = program
        .proc_id(entry)
        .ok_or_else(|| OracleError::UnknownEntry(entry.to_string()))?;
    for p in &program.procedures {
        if crate::ir::Cfg::build(p).has_back_edge() {
            return Err(OracleError::Loop(p.name.clone()));
        }
    }
    let places = places(program);
    let mut acc: HashMap<(NodeId, Place), LatticeValue> = HashMap::new();
    let mut pending = vec![State {
        stack: vec![Frame {
            proc: entry_id,
            pc: 0,
            locals: HashMap::new(),
        }],
        heap: HashMap::new(),
        statics: HashMap::new(),
        next_obj: 0,
    }];
    let mut paths = 0usize;

    while let Some(mut state) = pending.pop() {
        loop {
            let (proc_id, pc) = {
                let f = state.stack.last().expect("frame");
                (f.proc, f.pc)
            };
            let proc = program.procedure(proc_id);
            let node = NodeId::new(proc_id, pc);
            for place in &places[proc_id.0 as usize] {
                let v = read(&state, place).lattice();
                let slot = acc.entry((node, place.clone())).or_insert(LatticeValue::Top);
                *slot = slot.meet(v);
            }

            if pc == proc.exit() {
                let done = state.stack.pop().expect("frame");
                let Some(caller) = state.stack.last_mut() else {
                    paths += 1;
                    if paths > MAX_PATHS {
                        return Err(OracleError::TooManyPaths(MAX_PATHS));
                    }
                    break;
                };
                let call = caller.pc;
                let caller_proc = program.procedure(caller.proc);
                if let Some(StmtKind::Call { target: Some(t), .. }) = caller_proc.stmt(call).map(|s| &s.kind) {
                    let v = done.locals.get(RETURN_LOCAL).copied().unwrap_or(Val::Undef);
                    caller.locals.insert(t.clone(), v);
                }
                caller.pc = call + 1;
                continue;
            }
            let Some(stmt) = proc.stmt(pc) else {
                state.frame().pc = pc + 1;
                continue;
            };
            let mut next = pc + 1;
            match &stmt.kind {
                StmtKind::ConstAssign { target, value } => state.set(target, Val::Int(*value)),
                StmtKind::Binop {
                    target,
                    source,
                    op,
                    operand,
                } => {
                    let v = match state.local(source) {
                        Val::Int(x) => op.eval(x, *operand).map_or(Val::Unknown, Val::Int),
                        Val::Undef => Val::Undef,
                        Val::Unknown | Val::Ref(_) => Val::Unknown,
                    };
                    state.set(target, v);
                }
                StmtKind::Copy { target, source } => {
                    let v = state.local(source);
                    state.set(target, v);
                }
                StmtKind::FieldLoad { target, base, field } => {
                    let v = state.cell(base, field);
                    state.set(target, v);
                }
                StmtKind::FieldStore { base, field, source } => {
                    let v = state.local(source);
                    state.store(base, field, v);
                }
                StmtKind::ArrayLoad { target, base, index } => {
                    let v = state.cell(base, &array_field(*index));
                    state.set(target, v);
                }
                StmtKind::ArrayStore { base, index, source } => {
                    let v = state.local(source);
                    state.store(base, &array_field(*index), v);
                }
                StmtKind::StaticLoad { target, class, field } => {
                    let v = state.statics.get(&(class.clone(), field.clone())).copied().unwrap_or(Val::Undef);
                    state.set(target, v);
                }
                StmtKind::StaticStore { class, field, source } => {
                    let v = state.local(source);
                    state.statics.insert((class.clone(), field.clone()), v);
                }
                StmtKind::New { target } => {
                    let o = state.next_obj;
                    state.next_obj += 1;
                    state.set(target, Val::Ref(o));
                }
                StmtKind::Return { value } => {
                    if let Some(v) = value {
                        let v = state.local(v);
                        state.set(RETURN_LOCAL, v);
                    }
                    next = proc.exit();
                }
                StmtKind::Goto { label } => next = proc.label_node(label).expect("resolved label"),
                StmtKind::Branch { label, .. } => {
                    let target = proc.label_node(label).expect("resolved label");
                    if target != next {
                        let mut other = state.clone();
                        other.frame().pc = target;
                        pending.push(other);
                    }
                }
                StmtKind::Label { .. } => {}
                StmtKind::Call { callee, args, .. } => {
                    if state.stack.len() >= max_depth {
                        return Err(OracleError::DepthExceeded(max_depth));
                    }
                    let q = program.proc_id(callee).expect("resolved callee");
                    let locals = program
                        .procedure(q)
                        .params
                        .iter()
                        .zip(args)
                        .map(|(p, a)| (p.clone(), state.local(a)))
                        .collect();
                    state.stack.push(Frame { proc: q, pc: 0, locals });
                    continue;
                }
            }
            state.frame().pc = next;
        }
    }

    Ok(acc.into_iter().filter(|(_, v)| *v != LatticeValue::Top).collect())
}
