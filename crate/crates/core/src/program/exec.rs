use chrono::NaiveDate;

use super::typecheck::{type_check, TypeError};
use super::{Operator, Program};
use crate::table::{normalize, parse_date, parse_number, CellValue, Table};

#[derive(Debug, Clone, PartialEq)]
pub enum RuntimeValue {
    /// Ascending, duplicate-free row indices.
    RowSet(Vec<usize>),
    Number(f64),
    Text(String),
    Date(NaiveDate),
    Bool(bool),
}

impl RuntimeValue {
    pub fn as_bool(&self) -> Option<bool> {
        match self {
            RuntimeValue::Bool(b) => Some(*b),
            _ => None,
        }
    }

    /// Answer-string rendering: canonical numbers, verbatim text, ISO dates.
    pub fn render(&self) -> String {
        match self {
            RuntimeValue::RowSet(rows) => {
                let parts: Vec<String> = rows.iter().map(|r| r.to_string()).collect();
                format!("rows[{}]", parts.join(","))
            }
            RuntimeValue::Number(v) => format_number(*v),
            RuntimeValue::Text(s) => s.clone(),
            RuntimeValue::Date(d) => d.format("%Y-%m-%d").to_string(),
            RuntimeValue::Bool(b) => b.to_string(),
        }
    }
}

/// Shortest round-tripping decimal without trailing zeros; `-0` prints as `0`.
pub fn format_number(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v}")
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExecError {
    #[error("hop over {rows} rows with differing {column:?} values")]
    HopAmbiguous { column: String, rows: usize },
    #[error("{op} over an empty row set")]
    EmptyAggregate { op: &'static str },
    #[error("{op} hit an empty cell in column {column:?} (row {row})")]
    MissingCell {
        op: &'static str,
        column: String,
        row: usize,
    },
    #[error(transparent)]
    Type(#[from] TypeError),
}

const REL_TOL: f64 = 1e-9;

fn approx_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= REL_TOL * a.abs().max(b.abs())
}

/// Equality used by `eq`, `filter_eq` and `hop`: numbers within relative
/// tolerance 1e-9, text and dates exactly.
pub fn values_equal(a: &RuntimeValue, b: &RuntimeValue) -> bool {
    match (a, b) {
        (RuntimeValue::Number(x), RuntimeValue::Number(y)) => approx_eq(*x, *y),
        (x, y) => x == y,
    }
}

fn greater(a: f64, b: f64) -> bool {
    a > b && !approx_eq(a, b)
}

fn less(a: f64, b: f64) -> bool {
    a < b && !approx_eq(a, b)
}

fn cell_to_value(v: &CellValue) -> Option<RuntimeValue> {
    match v {
        CellValue::Missing => None,
        CellValue::Number(x) => Some(RuntimeValue::Number(*x)),
        CellValue::Text(s) => Some(RuntimeValue::Text(s.clone())),
        CellValue::Date(d) => Some(RuntimeValue::Date(*d)),
    }
}

/// Interpret a literal as the same kind as `like`.
fn coerce_literal(lit: &str, like: &RuntimeValue) -> RuntimeValue {
    match like {
        RuntimeValue::Number(_) => {
            RuntimeValue::Number(parse_number(lit).expect("type-checked numeric literal"))
        }
        RuntimeValue::Date(_) => {
            RuntimeValue::Date(parse_date(&normalize(lit)).expect("type-checked date literal"))
        }
        _ => RuntimeValue::Text(normalize(lit)),
    }
}

struct Exec<'t> {
    table: &'t Table,
}

impl Exec<'_> {
    fn col(&self, p: &Program) -> (usize, String) {
        match p {
            Program::Column(name) => (
                self.table.column_index(name).expect("type-checked column"),
                name.clone(),
            ),
            _ => unreachable!("type-checked column slot"),
        }
    }

    fn lit<'p>(&self, p: &'p Program) -> &'p str {
        match p {
            Program::Literal(l) => l,
            _ => unreachable!("type-checked literal slot"),
        }
    }

    fn rows(&self, p: &Program) -> Result<Vec<usize>, ExecError> {
        match self.eval(p)? {
            RuntimeValue::RowSet(r) => Ok(r),
            _ => unreachable!("type-checked row set"),
        }
    }

    fn number(&self, p: &Program) -> Result<f64, ExecError> {
        if let Program::Literal(l) = p {
            return Ok(parse_number(l).expect("type-checked numeric literal"));
        }
        match self.eval(p)? {
            RuntimeValue::Number(v) => Ok(v),
            _ => unreachable!("type-checked number"),
        }
    }

    fn bool(&self, p: &Program) -> Result<bool, ExecError> {
        match self.eval(p)? {
            RuntimeValue::Bool(b) => Ok(b),
            _ => unreachable!("type-checked bool"),
        }
    }

    /// Non-missing numeric cells of `col` over `rows`, in row order.
    fn numeric_cells(
        &self,
        op: Operator,
        rows: &[usize],
        col: usize,
        name: &str,
    ) -> Result<Vec<(usize, f64)>, ExecError> {
        if rows.is_empty() {
            return Err(ExecError::EmptyAggregate { op: op.name() });
        }
        let vals: Vec<(usize, f64)> = rows
            .iter()
            .filter_map(|&r| match self.table.cell(r, col).value {
                CellValue::Number(v) => Some((r, v)),
                _ => None,
            })
            .collect();
        if vals.is_empty() {
            return Err(ExecError::MissingCell {
                op: op.name(),
                column: name.to_string(),
                row: rows[0],
            });
        }
        Ok(vals)
    }

    fn filter(&self, op: Operator, args: &[Program]) -> Result<RuntimeValue, ExecError> {
        let rows = self.rows(&args[0])?;
        let (col, _) = self.col(&args[1]);
        let lit = self.lit(&args[2]);
        let kept = rows
            .into_iter()
            .filter(|&r| {
                let Some(cell) = cell_to_value(&self.table.cell(r, col).value) else {
                    return false;
                };
                match op {
                    Operator::FilterEq => values_equal(&cell, &coerce_literal(lit, &cell)),
                    Operator::FilterNotEq => !values_equal(&cell, &coerce_literal(lit, &cell)),
                    _ => {
                        let (RuntimeValue::Number(v), Some(x)) = (cell, parse_number(lit)) else {
                            unreachable!("type-checked numeric filter")
                        };
                        match op {
                            Operator::FilterGreater => greater(v, x),
                            Operator::FilterLess => less(v, x),
                            Operator::FilterGreaterEq => !less(v, x),
                            Operator::FilterLessEq => !greater(v, x),
                            _ => unreachable!(),
                        }
                    }
                }
            })
            .collect();
        Ok(RuntimeValue::RowSet(kept))
    }

    fn eval(&self, p: &Program) -> Result<RuntimeValue, ExecError> {
        use Operator::*;
        let (op, args) = match p {
            Program::AllRows => return Ok(RuntimeValue::RowSet((0..self.table.n_rows()).collect())),
            Program::Literal(l) => return Ok(RuntimeValue::Text(normalize(l))),
            Program::Column(_) => unreachable!("type-checked: column outside a column slot"),
            Program::Apply(op, args) => (*op, args.as_slice()),
        };
        match op {
            FilterEq | FilterNotEq | FilterGreater | FilterLess | FilterGreaterEq | FilterLessEq => {
                self.filter(op, args)
            }
            Hop => {
                let rows = self.rows(&args[0])?;
                let (col, name) = self.col(&args[1]);
                if rows.is_empty() {
                    return Err(ExecError::EmptyAggregate { op: "hop" });
                }
                // Missing cells are reported before disagreement, so the
                // error does not depend on row order.
                let mut vals = Vec::with_capacity(rows.len());
                for &r in &rows {
                    vals.push(cell_to_value(&self.table.cell(r, col).value).ok_or_else(|| {
                        ExecError::MissingCell {
                            op: "hop",
                            column: name.clone(),
                            row: r,
                        }
                    })?);
                }
                if vals.iter().any(|v| !values_equal(&vals[0], v)) {
                    return Err(ExecError::HopAmbiguous {
                        column: name,
                        rows: rows.len(),
                    });
                }
                Ok(vals.swap_remove(0))
            }
            Max | Min | Sum | Avg => {
                let rows = self.rows(&args[0])?;
                let (col, name) = self.col(&args[1]);
                let vals = self.numeric_cells(op, &rows, col, &name)?;
                let mut it = vals.iter().map(|&(_, v)| v);
                let first = it.next().expect("non-empty");
                let v = match op {
                    Max => it.fold(first, |a, b| if b > a { b } else { a }),
                    Min => it.fold(first, |a, b| if b < a { b } else { a }),
                    Sum => it.fold(first, |a, b| a + b),
                    _ => it.fold(first, |a, b| a + b) / vals.len() as f64,
                };
                Ok(RuntimeValue::Number(v))
            }
            Argmax | Argmin => {
                let rows = self.rows(&args[0])?;
                let (col, name) = self.col(&args[1]);
                let vals = self.numeric_cells(op, &rows, col, &name)?;
                let pick = |a: f64, b: f64| if op == Argmax { b > a } else { b < a };
                let best = vals
                    .iter()
                    .map(|&(_, v)| v)
                    .fold(vals[0].1, |a, b| if pick(a, b) { b } else { a });
                let row = vals
                    .iter()
                    .find(|&&(_, v)| approx_eq(v, best))
                    .map(|&(r, _)| r)
                    .expect("best value is present");
                Ok(RuntimeValue::RowSet(vec![row]))
            }
            Count => Ok(RuntimeValue::Number(self.rows(&args[0])?.len() as f64)),
            Only => Ok(RuntimeValue::Bool(self.rows(&args[0])?.len() == 1)),
            Eq | NotEq => {
                let (a, b) = match (&args[0], &args[1]) {
                    (Program::Literal(x), Program::Literal(y)) => (
                        RuntimeValue::Text(normalize(x)),
                        RuntimeValue::Text(normalize(y)),
                    ),
                    (Program::Literal(x), other) => {
                        let b = self.eval(other)?;
                        (coerce_literal(x, &b), b)
                    }
                    (other, Program::Literal(y)) => {
                        let a = self.eval(other)?;
                        let b = coerce_literal(y, &a);
                        (a, b)
                    }
                    (x, y) => (self.eval(x)?, self.eval(y)?),
                };
                let same = values_equal(&a, &b);
                Ok(RuntimeValue::Bool(if op == Eq { same } else { !same }))
            }
            Greater | Less => {
                let a = self.number(&args[0])?;
                let b = self.number(&args[1])?;
                Ok(RuntimeValue::Bool(if op == Greater {
                    greater(a, b)
                } else {
                    less(a, b)
                }))
            }
            And => {
                let a = self.bool(&args[0])?;
                let b = self.bool(&args[1])?;
                Ok(RuntimeValue::Bool(a && b))
            }
        }
    }
}

/// Type-check `p` against `t`, then evaluate it. Missing cells never pass a
/// filter and are skipped by aggregates; `hop` on a missing cell fails.
pub fn execute(p: &Program, t: &Table) -> Result<RuntimeValue, ExecError> {
    type_check(p, t)?;
    Exec { table: t }.eval(p)
}
