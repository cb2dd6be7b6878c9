//! Three-address intermediate representation.
//!
//! A [`Program`] is a list of procedures, each a flat list of statements in
//! the normalized form the analyses expect: binary operations have exactly
//! one variable operand and one integer literal, heap access paths have
//! length one, and array indices are literals.
//!
//! Every procedure gets a synthetic start node (index 0) and a synthetic exit
//! node (index `body.len() + 1`); statement `i` of the body is node `i + 1`.

mod cfg;
mod parser;
mod printer;
mod supergraph;

use std::collections::HashMap;
use std::fmt;

pub use cfg::Cfg;
pub use parser::parse_program;
pub use supergraph::{build_supergraph, CallSite, Supergraph};

use crate::lattice::LatticeValue;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IrError {
    #[error("{line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{line}: call to unknown procedure `{callee}`")]
    UnknownCallee { line: usize, callee: String },
    #[error("{line}: call to `{callee}` passes {given} arguments, expected {expected}")]
    ArityMismatch {
        line: usize,
        callee: String,
        given: usize,
        expected: usize,
    },
    #[error("{line}: duplicate procedure `{name}`")]
    DuplicateProcedure { line: usize, name: String },
    #[error("{line}: duplicate label `{label}` in `{procedure}`")]
    DuplicateLabel {
        line: usize,
        procedure: String,
        label: String,
    },
    #[error("{line}: unresolved label `{label}` in `{procedure}`")]
    UnresolvedLabel {
        line: usize,
        procedure: String,
        label: String,
    },
    #[error("unknown entry procedure `{0}`")]
    UnknownEntry(String),
    #[error("no entry procedures given")]
    NoEntries,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }

    /// Concrete evaluation with truncating division. `None` on overflow or
    /// division by zero.
    pub fn eval(self, lhs: i64, rhs: i64) -> Option<i64> {
        match self {
            BinOp::Add => lhs.checked_add(rhs),
            BinOp::Sub => lhs.checked_sub(rhs),
            BinOp::Mul => lhs.checked_mul(rhs),
            BinOp::Div => lhs.checked_div(rhs),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum StmtKind {
    ConstAssign {
        target: String,
        value: i64,
    },
    Binop {
        target: String,
        source: String,
        op: BinOp,
        operand: i64,
    },
    Copy {
        target: String,
        source: String,
    },
    FieldLoad {
        target: String,
        base: String,
        field: String,
    },
    FieldStore {
        base: String,
        field: String,
        source: String,
    },
    StaticLoad {
        target: String,
        class: String,
        field: String,
    },
    StaticStore {
        class: String,
        field: String,
        source: String,
    },
    ArrayLoad {
        target: String,
        base: String,
        index: i64,
    },
    ArrayStore {
        base: String,
        index: i64,
        source: String,
    },
    New {
        target: String,
    },
    Call {
        target: Option<String>,
        callee: String,
        args: Vec<String>,
    },
    Return {
        value: Option<String>,
    },
    /// `if * goto L` when `cond` is `None`.
    Branch {
        cond: Option<String>,
        label: String,
    },
    Goto {
        label: String,
    },
    Label {
        name: String,
    },
}

impl StmtKind {
    pub fn is_call(&self) -> bool {
        matches!(self, StmtKind::Call { .. })
    }

    /// Branches, gotos and returns: the statements that end straight-line flow.
    pub fn is_control(&self) -> bool {
        matches!(
            self,
            StmtKind::Branch { .. } | StmtKind::Goto { .. } | StmtKind::Return { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Statement {
    pub kind: StmtKind,
    /// 1-based source line, 0 for synthesized statements.
    pub line: usize,
}

/// A heap or local location as written in source text (expectations, queries).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Place {
    Local(String),
    Field(String, String),
    Static(String, String),
    Array(String, i64),
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Local(name) => write!(f, "{name}"),
            Place::Field(base, field) => write!(f, "{base}.{field}"),
            Place::Static(class, field) => write!(f, "@{class}.{field}"),
            Place::Array(base, index) => write!(f, "{base}[{index}]"),
        }
    }
}

impl Place {
    /// Parses `x`, `x.f`, `@C.f` or `a[3]`.
    pub fn parse(text: &str) -> Option<Place> {
        let text = text.trim();
        let ident = |s: &str| parser::is_identifier(s).then(|| s.to_string());
        if let Some(rest) = text.strip_prefix('@') {
            let (class, field) = rest.split_once('.')?;
            return Some(Place::Static(ident(class)?, ident(field)?));
        }
        if let Some((base, rest)) = text.split_once('[') {
            let index = rest.strip_suffix(']')?.trim().parse().ok()?;
            return Some(Place::Array(ident(base.trim())?, index));
        }
        if let Some((base, field)) = text.split_once('.') {
            return Some(Place::Field(ident(base)?, ident(field)?));
        }
        Some(Place::Local(ident(text)?))
    }
}

/// `// expect x = 4` annotation: the value of `place` on entry to `node`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expectation {
    pub node: u32,
    pub place: Place,
    pub value: LatticeValue,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Procedure {
    pub name: String,
    pub params: Vec<String>,
    pub body: Vec<Statement>,
    pub expectations: Vec<Expectation>,
    pub line: usize,
    labels: HashMap<String, usize>,
}

impl Procedure {
    pub(crate) fn new(
        name: String,
        params: Vec<String>,
        body: Vec<Statement>,
        expectations: Vec<Expectation>,
        line: usize,
    ) -> Result<Self, IrError> {
        let mut labels = HashMap::new();
        for (i, stmt) in body.iter().enumerate() {
            if let StmtKind::Label { name: label } = &stmt.kind {
                if labels.insert(label.clone(), i).is_some() {
                    return Err(IrError::DuplicateLabel {
                        line: stmt.line,
                        procedure: name,
                        label: label.clone(),
                    });
                }
            }
        }
        let proc = Procedure {
            name,
            params,
            body,
            expectations,
            line,
            labels,
        };
        for stmt in &proc.body {
            if let StmtKind::Branch { label, .. } | StmtKind::Goto { label } = &stmt.kind {
                if !proc.labels.contains_key(label) {
                    return Err(IrError::UnresolvedLabel {
                        line: stmt.line,
                        procedure: proc.name.clone(),
                        label: label.clone(),
                    });
                }
            }
        }
        Ok(proc)
    }

    pub const START: u32 = 0;

    pub fn exit(&self) -> u32 {
        self.body.len() as u32 + 1
    }

    pub fn node_count(&self) -> usize {
        self.body.len() + 2
    }

    /// The statement at `node`, `None` for start and exit.
    pub fn stmt(&self, node: u32) -> Option<&Statement> {
        if node == 0 {
            None
        } else {
            self.body.get(node as usize - 1)
        }
    }

    /// Node index of the label statement `label`.
    pub fn label_node(&self, label: &str) -> Option<u32> {
        self.labels.get(label).map(|&i| i as u32 + 1)
    }

    /// Every local name mentioned in the procedure, parameters first.
    pub fn locals(&self) -> Vec<String> {
        let mut seen: Vec<String> = Vec::new();
        let mut push = |name: &String| {
            if !seen.contains(name) {
                seen.push(name.clone());
            }
        };
        self.params.iter().for_each(&mut push);
        for stmt in &self.body {
            for name in stmt.kind.locals() {
                push(name);
            }
        }
        seen
    }
}

impl StmtKind {
    /// Locals read or written by the statement.
    pub fn locals(&self) -> Vec<&String> {
        use StmtKind::*;
        match self {
            ConstAssign { target, .. } | New { target } | StaticLoad { target, .. } => {
                vec![target]
            }
            Binop { target, source, .. } | Copy { target, source } => vec![target, source],
            FieldLoad { target, base, .. } | ArrayLoad { target, base, .. } => vec![target, base],
            FieldStore { base, source, .. } | ArrayStore { base, source, .. } => vec![base, source],
            StaticStore { source, .. } => vec![source],
            Call { target, args, .. } => target.iter().chain(args.iter()).collect(),
            Return { value } => value.iter().collect(),
            Branch { cond, .. } => cond.iter().collect(),
            Goto { .. } | Label { .. } => vec![],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProcId(pub u32);

/// A node of the supergraph: a procedure and a node index inside it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId {
    pub proc: ProcId,
    pub index: u32,
}

impl NodeId {
    pub fn new(proc: ProcId, index: u32) -> Self {
        NodeId { proc, index }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub procedures: Vec<Procedure>,
    by_name: HashMap<String, ProcId>,
}

impl Program {
    pub(crate) fn new(procedures: Vec<Procedure>) -> Result<Self, IrError> {
        let mut by_name = HashMap::new();
        for (i, proc) in procedures.iter().enumerate() {
            if by_name.insert(proc.name.clone(), ProcId(i as u32)).is_some() {
                return Err(IrError::DuplicateProcedure {
                    line: proc.line,
                    name: proc.name.clone(),
                });
            }
        }
        let program = Program {
            procedures,
            by_name,
        };
        for proc in &program.procedures {
            for stmt in &proc.body {
                if let StmtKind::Call { callee, args, .. } = &stmt.kind {
                    let Some(id) = program.proc_id(callee) else {
                        return Err(IrError::UnknownCallee {
                            line: stmt.line,
                            callee: callee.clone(),
                        });
                    };
                    let expected = program.procedure(id).params.len();
                    if expected != args.len() {
                        return Err(IrError::ArityMismatch {
                            line: stmt.line,
                            callee: callee.clone(),
                            given: args.len(),
                            expected,
                        });
                    }
                }
            }
        }
        Ok(program)
    }

    pub fn proc_id(&self, name: &str) -> Option<ProcId> {
        self.by_name.get(name).copied()
    }

    pub fn procedure(&self, id: ProcId) -> &Procedure {
        &self.procedures[id.0 as usize]
    }

    pub fn proc_ids(&self) -> impl Iterator<Item = ProcId> {
        (0..self.procedures.len() as u32).map(ProcId)
    }

    pub fn stmt(&self, node: NodeId) -> Option<&Statement> {
        self.procedure(node.proc).stmt(node.index)
    }

    pub fn statement_count(&self) -> usize {
        self.procedures.iter().map(|p| p.body.len()).sum()
    }

    /// Human-readable node label: `start`, `exit` or the statement index.
    pub fn node_label(&self, node: NodeId) -> String {
        let proc = self.procedure(node.proc);
        if node.index == Procedure::START {
            "start".into()
        } else if node.index == proc.exit() {
            "exit".into()
        } else {
            node.index.to_string()
        }
    }

    /// Inverse of [`Program::node_label`].
    pub fn parse_node(&self, proc: ProcId, text: &str) -> Option<NodeId> {
        let p = self.procedure(proc);
        let index = match text {
            "start" => Procedure::START,
            "exit" => p.exit(),
            _ => text.parse().ok().filter(|&i: &u32| i <= p.exit())?,
        };
        Some(NodeId::new(proc, index))
    }
}
