//! Brute-force reference interpreter over the generator's own tree and
//! table types. It reads raw cell strings and parses numbers itself.

use super::gen::{Expr, GenTable, Kind};

#[derive(Debug, Clone, PartialEq)]
pub enum Val {
    Rows(Vec<usize>),
    Num(f64),
    Text(String),
    Bool(bool),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    Ambiguous,
    Empty,
    Missing,
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs())
}

fn col_index(t: &GenTable, e: &Expr) -> usize {
    match e {
        Expr::Col(name) => t.names.iter().position(|n| n == name).expect("generated column"),
        other => panic!("column expected, got {other:?}"),
    }
}

fn lit(e: &Expr) -> &str {
    match e {
        Expr::Lit(s) => s,
        other => panic!("literal expected, got {other:?}"),
    }
}

fn num(s: &str) -> f64 {
    s.parse().expect("generated numbers are plain decimals")
}

fn same(a: &Val, b: &Val) -> bool {
    match (a, b) {
        (Val::Num(x), Val::Num(y)) => close(*x, *y),
        _ => a == b,
    }
}

/// Cell as a value of its column's kind.
fn cell(t: &GenTable, r: usize, c: usize) -> Option<Val> {
    let s = t.cells[r][c].as_ref()?;
    Some(match t.kinds[c] {
        Kind::Num => Val::Num(num(s)),
        Kind::Text => Val::Text(s.clone()),
    })
}

pub fn eval(e: &Expr, t: &GenTable) -> Result<Val, Fault> {
    let (name, a) = match e {
        Expr::All => return Ok(Val::Rows((0..t.cells.len()).collect())),
        Expr::Lit(s) => return Ok(Val::Text(s.clone())),
        Expr::Col(_) => panic!("bare column"),
        Expr::Op(name, a) => (*name, a),
    };
    let rows = |x: &Expr| -> Result<Vec<usize>, Fault> {
        match eval(x, t)? {
            Val::Rows(r) => Ok(r),
            v => panic!("row set expected, got {v:?}"),
        }
    };
    let number = |x: &Expr| -> Result<f64, Fault> {
        if let Expr::Lit(s) = x {
            return Ok(num(s));
        }
        match eval(x, t)? {
            Val::Num(v) => Ok(v),
            v => panic!("number expected, got {v:?}"),
        }
    };
    match name {
        "filter_eq" | "filter_not_eq" | "filter_greater" | "filter_less" | "filter_greater_eq" | "filter_less_eq" => {
            let input = rows(&a[0])?;
            let c = col_index(t, &a[1]);
            let l = lit(&a[2]);
            let mut out = Vec::new();
            for r in input {
                let Some(v) = cell(t, r, c) else { continue };
                let keep = match (name, &v) {
                    ("filter_eq", Val::Num(x)) => close(*x, num(l)),
                    ("filter_eq", Val::Text(s)) => s == l,
                    ("filter_not_eq", Val::Num(x)) => !close(*x, num(l)),
                    ("filter_not_eq", Val::Text(s)) => s != l,
                    ("filter_greater", Val::Num(x)) => *x > num(l) && !close(*x, num(l)),
                    ("filter_less", Val::Num(x)) => *x < num(l) && !close(*x, num(l)),
                    ("filter_greater_eq", Val::Num(x)) => *x > num(l) || close(*x, num(l)),
                    ("filter_less_eq", Val::Num(x)) => *x < num(l) || close(*x, num(l)),
                    _ => panic!("ill-typed filter"),
                };
                if keep {
                    out.push(r);
                }
            }
            Ok(Val::Rows(out))
        }
        "hop" => {
            let input = rows(&a[0])?;
            let c = col_index(t, &a[1]);
            if input.is_empty() {
                return Err(Fault::Empty);
            }
            let mut vals = Vec::new();
            for &r in &input {
                vals.push(cell(t, r, c).ok_or(Fault::Missing)?);
            }
            if vals.iter().all(|v| same(&vals[0], v)) {
                Ok(vals[0].clone())
            } else {
                Err(Fault::Ambiguous)
            }
        }
        "max" | "min" | "sum" | "avg" | "argmax" | "argmin" => {
            let input = rows(&a[0])?;
            let c = col_index(t, &a[1]);
            if input.is_empty() {
                return Err(Fault::Empty);
            }
            let mut present: Vec<(usize, f64)> = Vec::new();
            for &r in &input {
                if let Some(Val::Num(v)) = cell(t, r, c) {
                    present.push((r, v));
                }
            }
            if present.is_empty() {
                return Err(Fault::Missing);
            }
            let hi = present.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
            let lo = present.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
            let mut total = 0.0;
            for p in &present {
                total += p.1;
            }
            let first_at = |target: f64| present.iter().find(|p| close(p.1, target)).expect("extremum present").0;
            Ok(match name {
                "max" => Val::Num(hi),
                "min" => Val::Num(lo),
                "sum" => Val::Num(total),
                "avg" => Val::Num(total / present.len() as f64),
                "argmax" => Val::Rows(vec![first_at(hi)]),
                _ => Val::Rows(vec![first_at(lo)]),
            })
        }
        "count" => Ok(Val::Num(rows(&a[0])?.len() as f64)),
        "only" => Ok(Val::Bool(rows(&a[0])?.len() == 1)),
        "eq" | "not_eq" => {
            let left = eval(&a[0], t)?;
            let right = match (&left, &a[1]) {
                (Val::Num(_), Expr::Lit(s)) => Val::Num(num(s)),
                _ => eval(&a[1], t)?,
            };
            let equal = same(&left, &right);
            Ok(Val::Bool(if name == "eq" { equal } else { !equal }))
        }
        "greater" | "less" => {
            let x = number(&a[0])?;
            let y = number(&a[1])?;
            let strict = if name == "greater" { x > y } else { x < y };
            Ok(Val::Bool(strict && !close(x, y)))
        }
        "and" => {
            let x = eval(&a[0], t)?;
            let y = eval(&a[1], t)?;
            match (x, y) {
                (Val::Bool(p), Val::Bool(q)) => Ok(Val::Bool(p && q)),
                other => panic!("Booleans expected, got {other:?}"),
            }
        }
        other => panic!("unknown operator {other}"),
    }
}
