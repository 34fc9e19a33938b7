//! The table-program language: `opname{arg;arg;...}` trees over a fixed
//! operator inventory.

mod exec;
mod parse;
mod typecheck;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use exec::{execute, format_number, values_equal, ExecError, RuntimeValue};
pub use parse::{parse_program, ParseError};
pub use typecheck::{check_statement_program, type_check, Type, TypeError};

/// What an argument slot accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    /// `all_rows` or a row-set operator.
    Rows,
    /// A column name leaf.
    Column,
    /// A literal leaf.
    Literal,
    /// A numeric-column name leaf.
    NumColumn,
    /// A numeric literal leaf.
    NumLiteral,
    /// A cell/number-valued operator or a literal leaf.
    Value,
    /// A number-valued operator (or `hop` on a numeric column) or a literal leaf.
    Number,
    /// A Boolean operator.
    Bool,
}

/// Statically known result class of an operator, before column kinds are
/// resolved against a table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Output {
    Rows,
    Number,
    /// `hop`: whatever kind the hopped column has.
    Cell,
    Bool,
}

macro_rules! operators {
    ($($variant:ident => $name:literal, [$($slot:ident),*] -> $out:ident;)*) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum Operator { $($variant),* }

        impl Operator {
            pub const ALL: &'static [Operator] = &[$(Operator::$variant),*];

            pub fn name(self) -> &'static str {
                match self { $(Operator::$variant => $name),* }
            }

            pub fn from_name(name: &str) -> Option<Operator> {
                match name { $($name => Some(Operator::$variant),)* _ => None }
            }

            pub fn slots(self) -> &'static [Slot] {
                match self { $(Operator::$variant => &[$(Slot::$slot),*]),* }
            }

            pub fn output(self) -> Output {
                match self { $(Operator::$variant => Output::$out),* }
            }
        }
    };
}

// `all_rows` is the 21st operator; it is nullary and represented by the
// `Program::AllRows` leaf.
operators! {
    FilterEq => "filter_eq", [Rows, Column, Literal] -> Rows;
    FilterNotEq => "filter_not_eq", [Rows, Column, Literal] -> Rows;
    FilterGreater => "filter_greater", [Rows, NumColumn, NumLiteral] -> Rows;
    FilterLess => "filter_less", [Rows, NumColumn, NumLiteral] -> Rows;
    FilterGreaterEq => "filter_greater_eq", [Rows, NumColumn, NumLiteral] -> Rows;
    FilterLessEq => "filter_less_eq", [Rows, NumColumn, NumLiteral] -> Rows;
    Hop => "hop", [Rows, Column] -> Cell;
    Max => "max", [Rows, NumColumn] -> Number;
    Min => "min", [Rows, NumColumn] -> Number;
    Sum => "sum", [Rows, NumColumn] -> Number;
    Avg => "avg", [Rows, NumColumn] -> Number;
    Count => "count", [Rows] -> Number;
    Argmax => "argmax", [Rows, NumColumn] -> Rows;
    Argmin => "argmin", [Rows, NumColumn] -> Rows;
    Eq => "eq", [Value, Value] -> Bool;
    NotEq => "not_eq", [Value, Value] -> Bool;
    Greater => "greater", [Number, Number] -> Bool;
    Less => "less", [Number, Number] -> Bool;
    And => "and", [Bool, Bool] -> Bool;
    Only => "only", [Rows] -> Bool;
}

impl Operator {
    pub fn arity(self) -> usize {
        self.slots().len()
    }

    /// The operator with the opposite direction, for antonym inversion.
    pub fn mirrored(self) -> Option<Operator> {
        use Operator::*;
        Some(match self {
            Max => Min,
            Min => Max,
            Argmax => Argmin,
            Argmin => Argmax,
            Greater => Less,
            Less => Greater,
            FilterGreater => FilterLess,
            FilterLess => FilterGreater,
            FilterGreaterEq => FilterLessEq,
            FilterLessEq => FilterGreaterEq,
            _ => return None,
        })
    }

    pub fn is_filter(self) -> bool {
        use Operator::*;
        matches!(
            self,
            FilterEq | FilterNotEq | FilterGreater | FilterLess | FilterGreaterEq | FilterLessEq
        )
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A program tree. Leaves keep their exact source text so printing and
/// re-parsing is lossless.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Program {
    Apply(Operator, Vec<Program>),
    Column(String),
    Literal(String),
    AllRows,
}

impl Program {
    pub fn apply(op: Operator, args: Vec<Program>) -> Program {
        Program::Apply(op, args)
    }

    pub fn col(name: &str) -> Program {
        Program::Column(name.to_string())
    }

    pub fn lit(value: &str) -> Program {
        Program::Literal(value.to_string())
    }

    pub fn op(&self) -> Option<Operator> {
        match self {
            Program::Apply(op, _) => Some(*op),
            _ => None,
        }
    }

    pub fn args(&self) -> &[Program] {
        match self {
            Program::Apply(_, args) => args,
            _ => &[],
        }
    }

    pub fn is_leaf(&self) -> bool {
        !matches!(self, Program::Apply(..))
    }

    /// Operator nesting depth; leaves (including `all_rows`) count 0.
    pub fn depth(&self) -> usize {
        match self {
            Program::Apply(_, args) => 1 + args.iter().map(Program::depth).max().unwrap_or(0),
            _ => 0,
        }
    }

    /// Pre-order traversal.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Program)) {
        f(self);
        for a in self.args() {
            a.walk(f);
        }
    }

    pub fn contains_op(&self, pred: impl Fn(Operator) -> bool) -> bool {
        let mut found = false;
        self.walk(&mut |p| {
            if let Some(op) = p.op() {
                found |= pred(op);
            }
        });
        found
    }

    pub fn literals(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.walk(&mut |p| {
            if let Program::Literal(l) = p {
                out.push(l.as_str());
            }
        });
        out
    }

    pub fn columns(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.walk(&mut |p| {
            if let Program::Column(c) = p {
                out.push(c.as_str());
            }
        });
        out
    }

    pub fn operators(&self) -> Vec<Operator> {
        let mut out = Vec::new();
        self.walk(&mut |p| {
            if let Some(op) = p.op() {
                out.push(op);
            }
        });
        out
    }

    /// Rebuild the tree bottom-up through `f`.
    pub fn map(&self, f: &impl Fn(Program) -> Program) -> Program {
        let rebuilt = match self {
            Program::Apply(op, args) => Program::Apply(*op, args.iter().map(|a| a.map(f)).collect()),
            leaf => leaf.clone(),
        };
        f(rebuilt)
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Program::Apply(op, args) => {
                write!(f, "{}{{", op.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(";")?;
                    }
                    a.fmt(f)?;
                }
                f.write_str("}")
            }
            Program::Column(c) => f.write_str(c),
            Program::Literal(l) => f.write_str(l),
            Program::AllRows => f.write_str("all_rows"),
        }
    }
}

/// Canonical text; `parse_program(&print_program(p)) == p`.
pub fn print_program(p: &Program) -> String {
    p.to_string()
}

impl FromStr for Program {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_program(s)
    }
}

impl Serialize for Program {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Program {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_program(&s).map_err(serde::de::Error::custom)
    }
}

/// A program with every leaf erased to `_`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Skeleton {
    Node(Operator, Vec<Skeleton>),
    Hole,
}

pub fn skeleton(p: &Program) -> Skeleton {
    match p {
        Program::Apply(op, args) => Skeleton::Node(*op, args.iter().map(skeleton).collect()),
        _ => Skeleton::Hole,
    }
}

impl Skeleton {
    pub fn op(&self) -> Option<Operator> {
        match self {
            Skeleton::Node(op, _) => Some(*op),
            Skeleton::Hole => None,
        }
    }

    pub fn args(&self) -> &[Skeleton] {
        match self {
            Skeleton::Node(_, args) => args,
            Skeleton::Hole => &[],
        }
    }

    pub fn contains_op(&self, pred: &impl Fn(Operator) -> bool) -> bool {
        match self {
            Skeleton::Node(op, args) => pred(*op) || args.iter().any(|a| a.contains_op(pred)),
            Skeleton::Hole => false,
        }
    }
}

impl fmt::Display for Skeleton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Skeleton::Node(op, args) => {
                write!(f, "{}{{", op.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(";")?;
                    }
                    a.fmt(f)?;
                }
                f.write_str("}")
            }
            Skeleton::Hole => f.write_str("_"),
        }
    }
}

impl FromStr for Skeleton {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse::parse_skeleton(s)
    }
}

/// True iff the root is a binary operator whose two arguments are both
/// operator subtrees.
pub fn is_splittable(p: &Program) -> bool {
    match p {
        Program::Apply(op, args) => {
            matches!(
                op,
                Operator::Eq | Operator::NotEq | Operator::Greater | Operator::Less | Operator::And
            ) && args.len() == 2
                && args.iter().all(|a| matches!(a, Program::Apply(..)))
        }
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const VENUE_MAX: &str =
        "eq{max{all_rows;attendance};hop{filter_eq{all_rows;venue;firhill};attendance}}";

    #[test]
    fn inventory_has_twenty_one_operators_with_all_rows() {
        assert_eq!(Operator::ALL.len() + 1, 21);
        for op in Operator::ALL {
            assert_eq!(Operator::from_name(op.name()), Some(*op));
        }
    }

    #[test]
    fn prints_canonical_form() {
        let p = Program::apply(Operator::Count, vec![Program::AllRows]);
        assert_eq!(print_program(&p), "count{all_rows}");
        let venues = parse_program(VENUE_MAX).unwrap();
        assert_eq!(print_program(&venues), VENUE_MAX);
    }

    #[test]
    fn nested_and_has_balanced_braces() {
        let src = "and{eq{hop{filter_eq{all_rows;a;x};b};1};eq{count{all_rows};2}}";
        let printed = print_program(&parse_program(src).unwrap());
        let open = printed.matches('{').count();
        assert_eq!(open, printed.matches('}').count());
        assert_eq!(printed, src);
    }

    #[test]
    fn skeleton_erases_leaves() {
        let venues = parse_program(VENUE_MAX).unwrap();
        assert_eq!(skeleton(&venues).to_string(), "eq{max{_;_};hop{filter_eq{_;_;_};_}}");
        let c = parse_program("count{all_rows}").unwrap();
        assert_eq!(skeleton(&c).to_string(), "count{_}");
    }

    #[test]
    fn skeleton_text_is_a_fixed_point() {
        let venues = parse_program(VENUE_MAX).unwrap();
        let sk = skeleton(&venues);
        let reparsed: Skeleton = sk.to_string().parse().unwrap();
        assert_eq!(reparsed, sk);
        assert_eq!(reparsed.to_string(), sk.to_string());
    }

    #[test]
    fn splittability() {
        assert!(is_splittable(&parse_program(VENUE_MAX).unwrap()));
        assert!(!is_splittable(&parse_program("count{all_rows}").unwrap()));
        assert!(!is_splittable(&parse_program("eq{count{all_rows};5}").unwrap()));
        assert!(!is_splittable(&parse_program("only{all_rows}").unwrap()));
    }

    #[test]
    fn depth_counts_operator_nesting() {
        assert_eq!(parse_program("count{all_rows}").unwrap().depth(), 1);
        assert_eq!(parse_program(VENUE_MAX).unwrap().depth(), 3);
    }

    #[test]
    fn serde_as_text() {
        let p = parse_program(VENUE_MAX).unwrap();
        let j = serde_json::to_string(&p).unwrap();
        assert_eq!(j, format!("\"{VENUE_MAX}\""));
        let back: Program = serde_json::from_str(&j).unwrap();
        assert_eq!(back, p);
    }
}
