use std::fmt;

use crate::ir::{parse_program, IrError, Program};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    Assignment,
    Branching,
    Loops,
    FieldSensitivity,
    ContextSensitivity,
    Array,
    NonLinear,
}

impl Category {
    pub const ALL: [Category; 7] = [
        Category::Assignment,
        Category::Branching,
        Category::Loops,
        Category::FieldSensitivity,
        Category::ContextSensitivity,
        Category::Array,
        Category::NonLinear,
    ];
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// One benchmark program. Expectations live in the source as
/// `// expect` annotations.
#[derive(Debug, Clone, Copy)]
pub struct CorpusCase {
    pub name: &'static str,
    pub category: Category,
    pub source: &'static str,
}

impl CorpusCase {
    /// `Category/Name`; names alone repeat across categories.
    pub fn id(&self) -> String {
        format!("{}/{}", self.category, self.name)
    }

    pub fn program(&self) -> Result<Program, IrError> {
        parse_program(self.source)
    }
}

macro_rules! case {
    ($cat:ident, $dir:literal, $name:literal) => {
        CorpusCase {
            name: $name,
            category: Category::$cat,
            source: include_str!(concat!("../../corpus/", $dir, "/", $name, ".ir")),
        }
    };
}

static CORPUS: &[CorpusCase] = &[
    case!(Assignment, "assignment", "AssignmentChain"),
    case!(Assignment, "assignment", "Constant"),
    case!(Assignment, "assignment", "ConstantBinop"),
    case!(Assignment, "assignment", "Increment"),
    case!(Assignment, "assignment", "LocalBinop"),
    case!(Assignment, "assignment", "LocalMultipleBinop"),
    case!(Assignment, "assignment", "Operators"),
    case!(Assignment, "assignment", "Overwrite"),
    case!(Assignment, "assignment", "Static"),
    case!(Branching, "branching", "DiffValuesMergedAndUsed"),
    case!(Branching, "branching", "DiffValuesMergedAndUsedInBinop"),
    case!(Branching, "branching", "DiffValuesMergedNotUsed"),
    case!(Branching, "branching", "SameValueMergedAndUsed"),
    case!(Branching, "branching", "SameValueMergedAndUsedInBinop"),
    case!(Branching, "branching", "SameValueMergedNotUsed"),
    case!(Loops, "loops", "ForLoopFixedBound"),
    case!(Loops, "loops", "ForLoopUnkownBound"),
    case!(Loops, "loops", "NestedLoops"),
    case!(Loops, "loops", "WhileTrue"),
    case!(Loops, "loops", "WhileUnknown"),
    case!(FieldSensitivity, "field_sensitivity", "FieldToField"),
    case!(FieldSensitivity, "field_sensitivity", "LoadConstant"),
    case!(FieldSensitivity, "field_sensitivity", "StoreBinop"),
    case!(FieldSensitivity, "field_sensitivity", "StoreBinopViaAlias"),
    case!(FieldSensitivity, "field_sensitivity", "StoreConstant"),
    case!(FieldSensitivity, "field_sensitivity", "StoreLocalViaAlias"),
    case!(FieldSensitivity, "field_sensitivity", "StoreViaAlias"),
    case!(ContextSensitivity, "context_sensitivity", "Add"),
    case!(ContextSensitivity, "context_sensitivity", "AssignFieldInCallee"),
    case!(ContextSensitivity, "context_sensitivity", "AssignStaticInCallee"),
    case!(ContextSensitivity, "context_sensitivity", "Id"),
    case!(ContextSensitivity, "context_sensitivity", "Increment"),
    case!(ContextSensitivity, "context_sensitivity", "Nested"),
    case!(Array, "array", "AliasedArrays"),
    case!(Array, "array", "ArrayToArray"),
    case!(Array, "array", "LargeIndex"),
    case!(Array, "array", "LoadConstant"),
    case!(Array, "array", "StoreConstant"),
    case!(NonLinear, "non_linear", "Binop"),
    case!(NonLinear, "non_linear", "HashCode"),
    case!(NonLinear, "non_linear", "NonLinearDoesNotLeak"),
    case!(NonLinear, "non_linear", "Square"),
];

/// The embedded benchmark corpus.
pub fn corpus() -> &'static [CorpusCase] {
    CORPUS
}
