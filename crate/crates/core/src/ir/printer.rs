use std::fmt;

use super::{Procedure, Program, StmtKind};

impl fmt::Display for StmtKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use StmtKind::*;
        match self {
            ConstAssign { target, value } => write!(f, "{target} = {value}"),
            Binop {
                target,
                source,
                op,
                operand,
            } => write!(f, "{target} = {source} {} {operand}", op.symbol()),
            Copy { target, source } => write!(f, "{target} = {source}"),
            FieldLoad { target, base, field } => write!(f, "{target} = {base}.{field}"),
            FieldStore { base, field, source } => write!(f, "{base}.{field} = {source}"),
            StaticLoad { target, class, field } => write!(f, "{target} = @{class}.{field}"),
            StaticStore { class, field, source } => write!(f, "@{class}.{field} = {source}"),
            ArrayLoad { target, base, index } => write!(f, "{target} = {base}[{index}]"),
            ArrayStore { base, index, source } => write!(f, "{base}[{index}] = {source}"),
            New { target } => write!(f, "{target} = new"),
            Call { target, callee, args } => {
                if let Some(target) = target {
                    write!(f, "{target} = ")?;
                }
                write!(f, "call {callee}({})", args.join(", "))
            }
            Return { value: Some(v) } => write!(f, "return {v}"),
            Return { value: None } => write!(f, "return"),
            Branch { cond, label } => {
                write!(f, "if {} goto {label}", cond.as_deref().unwrap_or("*"))
            }
            Goto { label } => write!(f, "goto {label}"),
            Label { name } => write!(f, "{name}:"),
        }
    }
}

impl fmt::Display for Procedure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "proc {}({}) {{", self.name, self.params.join(", "))?;
        let expect_at = |f: &mut fmt::Formatter<'_>, node: u32| -> fmt::Result {
            for e in self.expectations.iter().filter(|e| e.node == node) {
                writeln!(f, "  // expect {} = {}", e.place, e.value)?;
            }
            Ok(())
        };
        for (i, stmt) in self.body.iter().enumerate() {
            expect_at(f, i as u32 + 1)?;
            match &stmt.kind {
                StmtKind::Label { .. } => writeln!(f, "{}", stmt.kind)?,
                kind => writeln!(f, "  {kind}")?,
            }
        }
        expect_at(f, self.exit())?;
        writeln!(f, "}}")
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, proc) in self.procedures.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{proc}")?;
        }
        Ok(())
    }
}
