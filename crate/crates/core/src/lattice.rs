//! The flat integer lattice: `Top` above every constant, `Bottom` below.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum LatticeValue {
    /// No information yet (unreached or uninitialized).
    #[default]
    Top,
    /// Not a constant.
    Bottom,
    Const(i64),
}

impl LatticeValue {
    pub fn meet(self, other: LatticeValue) -> LatticeValue {
        meet_value(self, other)
    }

    /// Partial order of the flat lattice: `self ⊑ other`.
    pub fn leq(self, other: LatticeValue) -> bool {
        meet_value(self, other) == self
    }

    /// Parses `T`/`top`, `B`/`bottom` or an integer.
    pub fn parse(text: &str) -> Option<LatticeValue> {
        match text.trim() {
            "T" | "top" => Some(LatticeValue::Top),
            "B" | "bottom" => Some(LatticeValue::Bottom),
            other => other.parse().ok().map(LatticeValue::Const),
        }
    }
}

pub fn meet_value(l1: LatticeValue, l2: LatticeValue) -> LatticeValue {
    use LatticeValue::*;
    match (l1, l2) {
        (l, Top) | (Top, l) => l,
        (Bottom, _) | (_, Bottom) => Bottom,
        (Const(a), Const(b)) if a == b => Const(a),
        (Const(_), Const(_)) => Bottom,
    }
}

/// Renders as `T`, `B` or the integer, the form used on the command line.
impl fmt::Display for LatticeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LatticeValue::Top => write!(f, "T"),
            LatticeValue::Bottom => write!(f, "B"),
            LatticeValue::Const(c) => write!(f, "{c}"),
        }
    }
}
