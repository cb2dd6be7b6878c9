use std::fmt;

use crate::lattice::LatticeValue;
use crate::solver::EdgeFunction;

/// Edge functions of linear constant propagation.
///
/// `Linear { m, b }` is `λl. m·l + b` with `m ∉ {0}` and `(m, b) != (1, 0)`;
/// the constructors normalize those cases to `Constant` and `Identity`.
/// `Div(c)` is `λl. l / c` (truncating); it only composes exactly with
/// identities and constants and falls back to `AllBottom` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LcpEdge {
    AllTop,
    AllBottom,
    Identity,
    Constant(i64),
    Linear { m: i64, b: i64 },
    Div(i64),
}

impl LcpEdge {
    pub fn linear(m: i64, b: i64) -> LcpEdge {
        match (m, b) {
            (0, b) => LcpEdge::Constant(b),
            (1, 0) => LcpEdge::Identity,
            (m, b) => LcpEdge::Linear { m, b },
        }
    }

    pub fn div(c: i64) -> LcpEdge {
        match c {
            1 => LcpEdge::Identity,
            -1 => LcpEdge::Linear { m: -1, b: 0 },
            c => LcpEdge::Div(c),
        }
    }

    /// The edge function of `target = source <op> operand`.
    pub fn for_binop(op: crate::ir::BinOp, operand: i64) -> LcpEdge {
        use crate::ir::BinOp::*;
        match op {
            Add => LcpEdge::linear(1, operand),
            Sub => match operand.checked_neg() {
                Some(neg) => LcpEdge::linear(1, neg),
                None => LcpEdge::AllBottom,
            },
            Mul => LcpEdge::linear(operand, 0),
            Div => LcpEdge::div(operand),
        }
    }
}

fn overflow() -> LcpEdge {
    log::warn!("integer overflow in edge function composition; result is bottom");
    LcpEdge::AllBottom
}

pub fn compose(first: &LcpEdge, then: &LcpEdge) -> LcpEdge {
    use LcpEdge::*;
    match (*first, *then) {
        (_, AllTop) => AllTop,
        (_, AllBottom) => AllBottom,
        (_, Constant(c)) => Constant(c),
        (f, Identity) => f,
        (Identity, g) => g,
        (AllTop, _) => AllTop,
        (AllBottom, _) => AllBottom,
        (Constant(k), Linear { m, b }) => match k.checked_mul(m).and_then(|v| v.checked_add(b)) {
            Some(v) => Constant(v),
            None => overflow(),
        },
        (Constant(k), Div(c)) => match k.checked_div(c) {
            Some(v) => Constant(v),
            None => AllBottom,
        },
        (Linear { m: m1, b: b1 }, Linear { m: m2, b: b2 }) => {
            match (m2.checked_mul(m1), m2.checked_mul(b1).and_then(|v| v.checked_add(b2))) {
                (Some(m), Some(b)) => LcpEdge::linear(m, b),
                _ => overflow(),
            }
        }
        // Not representable in the family.
        (Linear { .. } | Div(_), Linear { .. } | Div(_)) => AllBottom,
    }
}

pub fn meet_edge(f1: &LcpEdge, f2: &LcpEdge) -> LcpEdge {
    use LcpEdge::*;
    match (*f1, *f2) {
        (AllTop, g) | (g, AllTop) => g,
        (f, g) if f == g => f,
        _ => AllBottom,
    }
}

pub fn apply(f: &LcpEdge, l: LatticeValue) -> LatticeValue {
    use LatticeValue::*;
    match (*f, l) {
        (LcpEdge::AllTop, _) => Top,
        (LcpEdge::AllBottom, _) => Bottom,
        (LcpEdge::Identity, l) => l,
        (LcpEdge::Constant(c), _) => Const(c),
        (LcpEdge::Linear { .. } | LcpEdge::Div(_), Top) => Top,
        (LcpEdge::Linear { .. } | LcpEdge::Div(_), Bottom) => Bottom,
        (LcpEdge::Linear { m, b }, Const(v)) => match m.checked_mul(v).and_then(|x| x.checked_add(b)) {
            Some(x) => Const(x),
            None => {
                log::warn!("integer overflow evaluating {m}*{v}+{b}; result is bottom");
                Bottom
            }
        },
        (LcpEdge::Div(c), Const(v)) => v.checked_div(c).map_or(Bottom, Const),
    }
}

impl EdgeFunction for LcpEdge {
    type Value = LatticeValue;

    fn identity() -> Self {
        LcpEdge::Identity
    }

    fn all_top() -> Self {
        LcpEdge::AllTop
    }

    fn is_all_top(&self) -> bool {
        *self == LcpEdge::AllTop
    }

    fn compose(&self, then: &Self) -> Self {
        compose(self, then)
    }

    fn meet(&self, other: &Self) -> Self {
        meet_edge(self, other)
    }

    fn apply(&self, value: &LatticeValue) -> LatticeValue {
        apply(self, *value)
    }
}

impl fmt::Display for LcpEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LcpEdge::AllTop => write!(f, "λl.T"),
            LcpEdge::AllBottom => write!(f, "λl.B"),
            LcpEdge::Identity => write!(f, "id"),
            LcpEdge::Constant(c) => write!(f, "λl.{c}"),
            LcpEdge::Linear { m, b } => write!(f, "λl.{m}*l+{b}"),
            LcpEdge::Div(c) => write!(f, "λl.l/{c}"),
        }
    }
}
