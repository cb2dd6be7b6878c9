//! Flow- and context-insensitive points-to over allocation sites.
//!
//! Constraints come from `new`, local copies, call argument and return
//! binding, field and array stores/loads (arrays are index-insensitive) and
//! static fields. Two locals alias when their points-to sets intersect.

use std::collections::{BTreeSet, HashMap};

use crate::ir::{ProcId, Program, StmtKind};

type Var = usize;
type Obj = usize;

/// `(procedure name, local name)`.
pub type QualifiedLocal = (String, String);

#[derive(Debug, Clone, Default)]
pub struct AliasAnalysis {
    /// Locals of each procedure, indexed by variable id.
    locals: HashMap<(ProcId, String), Var>,
    names: Vec<(ProcId, String)>,
    points_to: Vec<BTreeSet<Obj>>,
}

#[derive(Default)]
struct Builder {
    vars: HashMap<String, Var>,
    names: Vec<String>,
}

impl Builder {
    fn var(&mut self, key: String) -> Var {
        let next = self.names.len();
        *self.vars.entry(key.clone()).or_insert_with(|| {
            self.names.push(key);
            next
        })
    }
}

enum Constraint {
    Alloc(Var, Obj),
    Copy { to: Var, from: Var },
    Store { base: Var, field: String, from: Var },
    Load { to: Var, base: Var, field: String },
}

impl AliasAnalysis {
    pub fn compute(program: &Program) -> AliasAnalysis {
        let mut b = Builder::default();
        let mut constraints = Vec::new();
        let mut objects = 0usize;
        let local = |b: &mut Builder, p: ProcId, name: &str| b.var(format!("{}\u{0}{name}", p.0));
        let ret = |b: &mut Builder, p: ProcId| b.var(format!("{}\u{0}$ret", p.0));
        let stat = |b: &mut Builder, class: &str, field: &str| b.var(format!("@{class}.{field}"));

        for pid in program.proc_ids() {
            let proc = program.procedure(pid);
            for name in proc.locals() {
                local(&mut b, pid, &name);
            }
            for stmt in &proc.body {
                use StmtKind::*;
                match &stmt.kind {
                    New { target } => {
                        let v = local(&mut b, pid, target);
                        constraints.push(Constraint::Alloc(v, objects));
                        objects += 1;
                    }
                    Copy { target, source } => {
                        let to = local(&mut b, pid, target);
                        let from = local(&mut b, pid, source);
                        constraints.push(Constraint::Copy { to, from });
                    }
                    FieldStore { base, field, source } => {
                        let base = local(&mut b, pid, base);
                        let from = local(&mut b, pid, source);
                        constraints.push(Constraint::Store {
                            base,
                            field: field.clone(),
                            from,
                        });
                    }
                    FieldLoad { target, base, field } => {
                        let to = local(&mut b, pid, target);
                        let base = local(&mut b, pid, base);
                        constraints.push(Constraint::Load {
                            to,
                            base,
                            field: field.clone(),
                        });
                    }
                    ArrayStore { base, source, .. } => {
                        let base = local(&mut b, pid, base);
                        let from = local(&mut b, pid, source);
                        constraints.push(Constraint::Store {
                            base,
                            field: "[]".into(),
                            from,
                        });
                    }
                    ArrayLoad { target, base, .. } => {
                        let to = local(&mut b, pid, target);
                        let base = local(&mut b, pid, base);
                        constraints.push(Constraint::Load {
                            to,
                            base,
                            field: "[]".into(),
                        });
                    }
                    StaticStore { class, field, source } => {
                        let to = stat(&mut b, class, field);
                        let from = local(&mut b, pid, source);
                        constraints.push(Constraint::Copy { to, from });
                    }
                    StaticLoad { target, class, field } => {
                        let to = local(&mut b, pid, target);
                        let from = stat(&mut b, class, field);
                        constraints.push(Constraint::Copy { to, from });
                    }
                    Return { value: Some(v) } => {
                        let to = ret(&mut b, pid);
                        let from = local(&mut b, pid, v);
                        constraints.push(Constraint::Copy { to, from });
                    }
                    Call { target, callee, args } => {
                        let q = program.proc_id(callee).expect("resolved callee");
                        let params = program.procedure(q).params.clone();
                        for (arg, param) in args.iter().zip(&params) {
                            let to = local(&mut b, q, param);
                            let from = local(&mut b, pid, arg);
                            constraints.push(Constraint::Copy { to, from });
                        }
                        if let Some(t) = target {
                            let to = local(&mut b, pid, t);
                            let from = ret(&mut b, q);
                            constraints.push(Constraint::Copy { to, from });
                        }
                    }
                    _ => {}
                }
            }
        }

        let mut pts: Vec<BTreeSet<Obj>> = vec![BTreeSet::new(); b.names.len()];
        let mut heap: HashMap<(Obj, String), BTreeSet<Obj>> = HashMap::new();
        let mut changed = true;
        while changed {
            changed = false;
            for c in &constraints {
                match c {
                    Constraint::Alloc(v, o) => changed |= pts[*v].insert(*o),
                    Constraint::Copy { to, from } => {
                        if to != from {
                            let add: Vec<Obj> = pts[*from].difference(&pts[*to]).copied().collect();
                            changed |= !add.is_empty();
                            pts[*to].extend(add);
                        }
                    }
                    Constraint::Store { base, field, from } => {
                        for &o in &pts[*base] {
                            let cell = heap.entry((o, field.clone())).or_default();
                            for &x in &pts[*from] {
                                changed |= cell.insert(x);
                            }
                        }
                    }
                    Constraint::Load { to, base, field } => {
                        let mut add = Vec::new();
                        for &o in &pts[*base] {
                            if let Some(cell) = heap.get(&(o, field.clone())) {
                                add.extend(cell.difference(&pts[*to]).copied());
                            }
                        }
                        changed |= !add.is_empty();
                        pts[*to].extend(add);
                    }
                }
            }
        }

        let mut locals = HashMap::new();
        let mut names = vec![(ProcId(u32::MAX), String::new()); b.names.len()];
        for (key, &v) in &b.vars {
            if let Some((p, name)) = key.split_once('\u{0}') {
                let pid = ProcId(p.parse().expect("proc index"));
                locals.insert((pid, name.to_string()), v);
                names[v] = (pid, name.to_string());
            }
        }
        AliasAnalysis {
            locals,
            names,
            points_to: pts,
        }
    }

    fn var(&self, proc: ProcId, local: &str) -> Option<Var> {
        self.locals.get(&(proc, local.to_string())).copied()
    }

    /// Locals of `proc` that may alias `local`, always including `local`.
    pub fn aliases_in(&self, proc: ProcId, local: &str) -> Vec<String> {
        let mut out = vec![local.to_string()];
        let Some(v) = self.var(proc, local) else {
            return out;
        };
        let pts = &self.points_to[v];
        if pts.is_empty() {
            return out;
        }
        for (other, set) in self.points_to.iter().enumerate() {
            let (p, name) = &self.names[other];
            if other != v && *p == proc && !set.is_disjoint(pts) {
                out.push(name.clone());
            }
        }
        out.sort();
        out
    }

    /// Every local in the program that may alias `local` of `proc`.
    pub fn aliases(&self, program: &Program, proc: ProcId, local: &str) -> BTreeSet<QualifiedLocal> {
        let qualify = |p: ProcId, name: &str| (program.procedure(p).name.clone(), name.to_string());
        let mut out = BTreeSet::from([qualify(proc, local)]);
        let Some(v) = self.var(proc, local) else {
            return out;
        };
        let pts = &self.points_to[v];
        for (other, set) in self.points_to.iter().enumerate() {
            let (p, name) = &self.names[other];
            if p.0 != u32::MAX && !pts.is_empty() && !set.is_disjoint(pts) {
                out.insert(qualify(*p, name));
            }
        }
        out
    }
}

/// Whole-program may-alias set of `local` in procedure `proc`.
pub fn compute_aliases(program: &Program, proc: &str, local: &str) -> BTreeSet<QualifiedLocal> {
    let Some(pid) = program.proc_id(proc) else {
        return BTreeSet::new();
    };
    AliasAnalysis::compute(program).aliases(program, pid, local)
}
