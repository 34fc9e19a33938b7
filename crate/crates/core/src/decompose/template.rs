use super::{DecompositionType, Subproblem};
use crate::program::{Operator, Program};
use crate::table::Statement;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TemplateError {
    #[error("atomic statements have no template")]
    Atomic,
    #[error("cannot fill {c} template: {msg}")]
    Unfillable { c: DecompositionType, msg: String },
}

fn leaf(p: &Program) -> Option<&str> {
    match p {
        Program::Column(s) | Program::Literal(s) => Some(s),
        _ => None,
    }
}

/// Row-set condition as clauses joined by " and ". `count_style` selects
/// "k equal to v" over "k is v".
fn condition(r: &Program, count_style: bool) -> Option<Vec<String>> {
    let Program::Apply(op, args) = r else {
        return matches!(r, Program::AllRows).then(Vec::new);
    };
    let mut clauses = condition(args.first()?, count_style)?;
    let clause = match op {
        Operator::Argmax | Operator::Argmin => {
            let dir = if *op == Operator::Argmax { "maximum" } else { "minimum" };
            if count_style {
                format!("the {dir} {}", leaf(&args[1])?)
            } else {
                format!("{} is the {dir}", leaf(&args[1])?)
            }
        }
        op if op.is_filter() => {
            let rel = match (op, count_style) {
                (Operator::FilterEq, false) => "is",
                (Operator::FilterEq, true) => "equal to",
                (Operator::FilterNotEq, false) => "is not",
                (Operator::FilterNotEq, true) => "not equal to",
                (Operator::FilterGreater, false) => "is greater than",
                (Operator::FilterGreater, true) => "greater than",
                (Operator::FilterLess, false) => "is less than",
                (Operator::FilterLess, true) => "less than",
                (Operator::FilterGreaterEq, false) => "is at least",
                (Operator::FilterGreaterEq, true) => "at least",
                (Operator::FilterLessEq, false) => "is at most",
                (Operator::FilterLessEq, true) => "at most",
                _ => return None,
            };
            format!("{} {rel} {}", leaf(&args[1])?, leaf(&args[2])?)
        }
        _ => return None,
    };
    clauses.push(clause);
    Some(clauses)
}

fn when(r: &Program) -> Option<String> {
    let c = condition(r, false)?;
    Some(if c.is_empty() {
        String::new()
    } else {
        format!(" when {}", c.join(" and "))
    })
}

/// Noun phrase naming the value a sub-program computes.
fn noun_phrase(v: &Program) -> Option<String> {
    let Program::Apply(op, args) = v else {
        return leaf(v).map(str::to_string);
    };
    match op {
        Operator::Hop => Some(format!("the {}{}", leaf(&args[1])?, when(&args[0])?)),
        Operator::Max | Operator::Min | Operator::Sum | Operator::Avg => {
            let word = match op {
                Operator::Max => "maximum",
                Operator::Min => "minimum",
                Operator::Sum => "total",
                _ => "average",
            };
            Some(format!("the {word} {}{}", leaf(&args[1])?, when(&args[0])?))
        }
        Operator::Count => {
            let c = condition(&args[0], true)?;
            Some(if c.is_empty() {
                "the number of rows".to_string()
            } else {
                format!("the number of rows with {}", c.join(" and "))
            })
        }
        _ => None,
    }
}

/// Question whose answer is the value of `v`.
pub fn verbalize_question(v: &Program) -> Option<String> {
    if v.op() == Some(Operator::Count) {
        let c = condition(&v.args()[0], true)?;
        return Some(if c.is_empty() {
            "how many rows are there ?".to_string()
        } else {
            format!("how many rows have {} ?", c.join(" and "))
        });
    }
    if v.is_leaf() {
        return None;
    }
    Some(format!("what is {} ?", noun_phrase(v)?))
}

/// Declarative restatement of a Boolean program.
pub fn verbalize_claim(b: &Program) -> Option<String> {
    let Program::Apply(op, args) = b else {
        return None;
    };
    let rel = match op {
        Operator::Eq => "is",
        Operator::NotEq => "is not",
        Operator::Greater => "is greater than",
        Operator::Less => "is less than",
        Operator::Only => {
            let c = condition(&args[0], true)?;
            return (!c.is_empty()).then(|| format!("only one row has {}", c.join(" and ")));
        }
        Operator::And => {
            return Some(format!("{} and {}", verbalize_claim(&args[0])?, verbalize_claim(&args[1])?));
        }
        _ => return None,
    };
    Some(format!("{} {rel} {}", noun_phrase(&args[0])?, noun_phrase(&args[1])?))
}

fn question(c: DecompositionType, v: &Program) -> Result<Subproblem, TemplateError> {
    let text = verbalize_question(v).ok_or_else(|| TemplateError::Unfillable {
        c,
        msg: format!("cannot phrase {v} as a question"),
    })?;
    Ok(Subproblem::question(text, v.clone()))
}

fn claim(c: DecompositionType, b: &Program) -> Result<Subproblem, TemplateError> {
    let text = verbalize_claim(b).ok_or_else(|| TemplateError::Unfillable {
        c,
        msg: format!("cannot phrase {b} as a statement"),
    })?;
    Ok(Subproblem::statement(text, b.clone()))
}

/// Split statement text at its single "and" token, if there is exactly one.
fn split_clauses(s: &Statement) -> Option<(String, String)> {
    let toks = s.tokens();
    let mut ands = toks.iter().enumerate().filter(|(_, t)| **t == "and").map(|(i, _)| i);
    let i = ands.next()?;
    if ands.next().is_some() || i == 0 || i + 1 == toks.len() {
        return None;
    }
    Some((toks[..i].join(" "), toks[i + 1..].join(" ")))
}

/// Fill the template for type `c` from the arguments of `z`. Every
/// subproblem carries the sub-program it was read from as its probe.
pub fn instantiate_template(
    s: &Statement,
    z: &Program,
    c: DecompositionType,
) -> Result<Vec<Subproblem>, TemplateError> {
    use DecompositionType::*;
    let unfillable = |msg: &str| TemplateError::Unfillable { c, msg: msg.to_string() };
    let args = z.args();
    if args.len() != 2 {
        return Err(unfillable("program root is not binary"));
    }
    let is_extremum = |op: Operator| matches!(op, Operator::Max | Operator::Min | Operator::Argmax | Operator::Argmin);
    match c {
        Atomic => Err(TemplateError::Atomic),
        Superlative => {
            let (sup, other) = match (args[0].contains_op(is_extremum), args[1].contains_op(is_extremum)) {
                (true, false) => (&args[0], &args[1]),
                (false, true) => (&args[1], &args[0]),
                _ => return Err(unfillable("need exactly one extremum side")),
            };
            Ok(vec![question(c, sup)?, question(c, other)?])
        }
        Comparative => Ok(vec![question(c, &args[0])?, question(c, &args[1])?]),
        Conjunction => {
            if z.op() != Some(Operator::And) {
                return Err(unfillable("root is not a conjunction"));
            }
            if let Some((left, right)) = split_clauses(s) {
                return Ok(vec![
                    Subproblem::statement(left, args[0].clone()),
                    Subproblem::statement(right, args[1].clone()),
                ]);
            }
            Ok(vec![claim(c, &args[0])?, claim(c, &args[1])?])
        }
        Uniqueness => {
            if z.op() == Some(Operator::And) {
                let (only, other) = if args[0].op() == Some(Operator::Only) {
                    (&args[0], &args[1])
                } else if args[1].op() == Some(Operator::Only) {
                    (&args[1], &args[0])
                } else {
                    return Err(unfillable("conjunction without an only clause"));
                };
                let count = Program::apply(Operator::Count, vec![only.args()[0].clone()]);
                return Ok(vec![question(c, &count)?, claim(c, other)?]);
            }
            let (count, other) = if args[0].op() == Some(Operator::Count) {
                (&args[0], &args[1])
            } else if args[1].op() == Some(Operator::Count) {
                (&args[1], &args[0])
            } else {
                return Err(unfillable("no count side"));
            };
            Ok(vec![question(c, count)?, question(c, other)?])
        }
    }
}
