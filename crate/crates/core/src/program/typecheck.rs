use std::fmt;

use super::{Operator, Program};
use crate::table::{normalize, parse_date, parse_number, ColumnKind, Table};

/// Result type of a (sub)program once column kinds are known.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Type {
    RowSet,
    Number,
    Text,
    Date,
    Bool,
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl From<ColumnKind> for Type {
    fn from(k: ColumnKind) -> Type {
        match k {
            ColumnKind::Text => Type::Text,
            ColumnKind::Number => Type::Number,
            ColumnKind::Date => Type::Date,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TypeError {
    #[error("unknown column {0:?}")]
    UnknownColumn(String),
    #[error("{op} needs a numeric column, {column:?} is {kind}")]
    NonNumericColumn {
        op: &'static str,
        column: String,
        kind: ColumnKind,
    },
    #[error("literal {literal:?} is not a valid {expected}")]
    LiteralKind { literal: String, expected: Type },
    #[error("{op} cannot compare {left} with {right}")]
    Mismatch {
        op: &'static str,
        left: Type,
        right: Type,
    },
    #[error("{op} expected {expected}, found {found}")]
    Argument {
        op: &'static str,
        expected: Type,
        found: Type,
    },
    #[error("statement program must return Bool, found {0}")]
    NonBoolRoot(Type),
    #[error("malformed program: {0}")]
    Malformed(String),
}

/// A literal's type is decided by what it is compared against.
#[derive(Debug, Clone, Copy)]
enum Ty<'a> {
    Known(Type),
    Literal(&'a str),
}

pub(super) fn literal_fits(lit: &str, ty: Type) -> bool {
    match ty {
        Type::Number => parse_number(lit).is_some(),
        Type::Date => parse_date(&normalize(lit)).is_some(),
        Type::Text => true,
        Type::RowSet | Type::Bool => false,
    }
}

struct Checker<'t> {
    table: &'t Table,
}

impl Checker<'_> {
    fn column(&self, p: &Program) -> Result<(String, ColumnKind), TypeError> {
        match p {
            Program::Column(name) => {
                let idx = self
                    .table
                    .column_index(name)
                    .ok_or_else(|| TypeError::UnknownColumn(name.clone()))?;
                Ok((name.clone(), self.table.columns[idx].kind))
            }
            other => Err(TypeError::Malformed(format!("expected column, found {other}"))),
        }
    }

    fn numeric_column(&self, op: Operator, p: &Program) -> Result<(), TypeError> {
        let (column, kind) = self.column(p)?;
        if kind != ColumnKind::Number {
            return Err(TypeError::NonNumericColumn {
                op: op.name(),
                column,
                kind,
            });
        }
        Ok(())
    }

    fn literal<'p>(&self, p: &'p Program) -> Result<&'p str, TypeError> {
        match p {
            Program::Literal(l) => Ok(l),
            other => Err(TypeError::Malformed(format!("expected literal, found {other}"))),
        }
    }

    fn expect(&self, op: Operator, p: &Program, want: Type) -> Result<(), TypeError> {
        match self.infer(p)? {
            Ty::Known(t) if t == want => Ok(()),
            Ty::Known(found) => Err(TypeError::Argument {
                op: op.name(),
                expected: want,
                found,
            }),
            Ty::Literal(l) if literal_fits(l, want) => Ok(()),
            Ty::Literal(l) => Err(TypeError::LiteralKind {
                literal: l.to_string(),
                expected: want,
            }),
        }
    }

    fn infer<'p>(&self, p: &'p Program) -> Result<Ty<'p>, TypeError> {
        use Operator::*;
        let (op, args) = match p {
            Program::AllRows => return Ok(Ty::Known(Type::RowSet)),
            Program::Literal(l) => return Ok(Ty::Literal(l)),
            Program::Column(c) => {
                return Err(TypeError::Malformed(format!("column {c:?} used as a value")))
            }
            Program::Apply(op, args) => (*op, args.as_slice()),
        };
        if args.len() != op.arity() {
            return Err(TypeError::Malformed(format!(
                "{op} takes {} arguments, got {}",
                op.arity(),
                args.len()
            )));
        }
        let t = match op {
            FilterEq | FilterNotEq => {
                self.expect(op, &args[0], Type::RowSet)?;
                let (_, kind) = self.column(&args[1])?;
                let lit = self.literal(&args[2])?;
                if !literal_fits(lit, kind.into()) {
                    return Err(TypeError::LiteralKind {
                        literal: lit.to_string(),
                        expected: kind.into(),
                    });
                }
                Type::RowSet
            }
            FilterGreater | FilterLess | FilterGreaterEq | FilterLessEq => {
                self.expect(op, &args[0], Type::RowSet)?;
                self.numeric_column(op, &args[1])?;
                let lit = self.literal(&args[2])?;
                if !literal_fits(lit, Type::Number) {
                    return Err(TypeError::LiteralKind {
                        literal: lit.to_string(),
                        expected: Type::Number,
                    });
                }
                Type::RowSet
            }
            Hop => {
                self.expect(op, &args[0], Type::RowSet)?;
                self.column(&args[1])?.1.into()
            }
            Max | Min | Sum | Avg => {
                self.expect(op, &args[0], Type::RowSet)?;
                self.numeric_column(op, &args[1])?;
                Type::Number
            }
            Argmax | Argmin => {
                self.expect(op, &args[0], Type::RowSet)?;
                self.numeric_column(op, &args[1])?;
                Type::RowSet
            }
            Count => {
                self.expect(op, &args[0], Type::RowSet)?;
                Type::Number
            }
            Only => {
                self.expect(op, &args[0], Type::RowSet)?;
                Type::Bool
            }
            Eq | NotEq => {
                let scalar = |t: Type| matches!(t, Type::Number | Type::Text | Type::Date);
                match (self.infer(&args[0])?, self.infer(&args[1])?) {
                    (Ty::Literal(_), Ty::Literal(_)) => {}
                    (Ty::Known(t), Ty::Literal(l)) | (Ty::Literal(l), Ty::Known(t)) => {
                        if !scalar(t) {
                            return Err(TypeError::Mismatch {
                                op: op.name(),
                                left: t,
                                right: Type::Text,
                            });
                        }
                        if !literal_fits(l, t) {
                            return Err(TypeError::LiteralKind {
                                literal: l.to_string(),
                                expected: t,
                            });
                        }
                    }
                    (Ty::Known(a), Ty::Known(b)) => {
                        if a != b || !scalar(a) {
                            return Err(TypeError::Mismatch {
                                op: op.name(),
                                left: a,
                                right: b,
                            });
                        }
                    }
                }
                Type::Bool
            }
            Greater | Less => {
                self.expect(op, &args[0], Type::Number)?;
                self.expect(op, &args[1], Type::Number)?;
                Type::Bool
            }
            And => {
                self.expect(op, &args[0], Type::Bool)?;
                self.expect(op, &args[1], Type::Bool)?;
                Type::Bool
            }
        };
        Ok(Ty::Known(t))
    }
}

/// Resolve columns against `t` and return the root result type.
/// A bare literal root is typed as text.
pub fn type_check(p: &Program, t: &Table) -> Result<Type, TypeError> {
    match (Checker { table: t }).infer(p)? {
        Ty::Known(ty) => Ok(ty),
        Ty::Literal(_) => Ok(Type::Text),
    }
}

/// Strict check for whole-statement programs: the root must be Boolean.
pub fn check_statement_program(p: &Program, t: &Table) -> Result<(), TypeError> {
    match type_check(p, t)? {
        Type::Bool => Ok(()),
        other => Err(TypeError::NonBoolRoot(other)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::parse_program;

    fn table() -> Table {
        Table::from_csv_reader(
            "t",
            "venue,attendance,date\nfirhill,9500,2008-09-13\ncappielow,8000,2008-09-20\n".as_bytes(),
        )
        .unwrap()
    }

    fn check(src: &str) -> Result<Type, TypeError> {
        type_check(&parse_program(src).unwrap(), &table())
    }

    #[test]
    fn venues_is_bool() {
        assert_eq!(
            check("eq{max{all_rows;attendance};hop{filter_eq{all_rows;venue;firhill};attendance}}"),
            Ok(Type::Bool)
        );
    }

    #[test]
    fn max_over_text_column_fails() {
        assert!(matches!(check("max{all_rows;venue}"), Err(TypeError::NonNumericColumn { .. })));
    }

    #[test]
    fn strict_root_must_be_bool() {
        let p = parse_program("hop{all_rows;venue}").unwrap();
        assert_eq!(type_check(&p, &table()), Ok(Type::Text));
        assert_eq!(check_statement_program(&p, &table()), Err(TypeError::NonBoolRoot(Type::Text)));
    }

    #[test]
    fn literal_kinds_follow_the_other_side() {
        assert_eq!(check("eq{hop{all_rows;attendance};9,500}"), Ok(Type::Bool));
        assert!(matches!(check("eq{hop{all_rows;attendance};lots}"), Err(TypeError::LiteralKind { .. })));
        assert_eq!(check("eq{hop{all_rows;date};13 september 2008}"), Ok(Type::Bool));
        assert!(matches!(check("filter_greater{all_rows;attendance;many}"), Err(TypeError::LiteralKind { .. })));
        assert!(matches!(check("filter_eq{all_rows;date;soon}"), Err(TypeError::LiteralKind { .. })));
    }

    #[test]
    fn mismatched_comparisons() {
        assert!(matches!(
            check("eq{hop{all_rows;venue};count{all_rows}}"),
            Err(TypeError::Mismatch { .. })
        ));
        assert!(matches!(check("greater{hop{all_rows;venue};1}"), Err(TypeError::Argument { .. })));
        assert!(matches!(check("count{filter_eq{all_rows;stadium;x}}"), Err(TypeError::UnknownColumn(_))));
    }
}
