//! Random typed tables and well-typed programs, in a tree type of their own.

use rand::seq::IndexedRandom;
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Num,
    Text,
}

#[derive(Debug, Clone)]
pub struct GenTable {
    pub names: Vec<String>,
    pub kinds: Vec<Kind>,
    /// `None` is an empty cell.
    pub cells: Vec<Vec<Option<String>>>,
}

impl GenTable {
    pub fn header(&self) -> Vec<String> {
        self.names.clone()
    }

    pub fn raw_rows(&self) -> Vec<Vec<String>> {
        self.cells
            .iter()
            .map(|r| r.iter().map(|c| c.clone().unwrap_or_default()).collect())
            .collect()
    }

    fn cols_of(&self, k: Kind) -> Vec<usize> {
        (0..self.kinds.len()).filter(|&i| self.kinds[i] == k).collect()
    }
}

const WORDS: &[&str] = &["red", "blue", "green", "love street", "firhill", "east end"];

fn number_text(rng: &mut impl Rng) -> String {
    if rng.random_bool(0.2) {
        format!("{}.5", rng.random_range(0..10))
    } else {
        rng.random_range(0..12).to_string()
    }
}

/// 1..=6 rows, 1..=4 columns, about one empty cell in ten. The first cell
/// of every column is filled so its kind is unambiguous.
pub fn random_table(rng: &mut impl Rng) -> GenTable {
    let rows = rng.random_range(1..=6);
    let cols = rng.random_range(1..=4);
    let kinds: Vec<Kind> = (0..cols)
        .map(|_| if rng.random_bool(0.5) { Kind::Num } else { Kind::Text })
        .collect();
    let cells = (0..rows)
        .map(|r| {
            kinds
                .iter()
                .map(|k| {
                    if r > 0 && rng.random_bool(0.1) {
                        None
                    } else {
                        Some(match k {
                            Kind::Num => number_text(rng),
                            Kind::Text => WORDS.choose(rng).expect("non-empty").to_string(),
                        })
                    }
                })
                .collect()
        })
        .collect();
    GenTable {
        names: (0..cols).map(|i| format!("col {i}")).collect(),
        kinds,
        cells,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    All,
    Col(String),
    Lit(String),
    Op(&'static str, Vec<Expr>),
}

impl Expr {
    pub fn text(&self) -> String {
        match self {
            Expr::All => "all_rows".into(),
            Expr::Col(c) | Expr::Lit(c) => c.clone(),
            Expr::Op(name, args) => {
                let inner: Vec<String> = args.iter().map(Expr::text).collect();
                format!("{name}{{{}}}", inner.join(";"))
            }
        }
    }

    /// Same program with random spaces around the structural tokens.
    pub fn spaced_text(&self, rng: &mut impl Rng) -> String {
        match self {
            Expr::All => "all_rows".into(),
            Expr::Col(c) | Expr::Lit(c) => c.clone(),
            Expr::Op(name, args) => {
                let inner: Vec<String> = args
                    .iter()
                    .map(|a| format!("{}{}{}", pad(rng), a.spaced_text(rng), pad(rng)))
                    .collect();
                format!("{name}{}{{{}}}", pad(rng), inner.join(";"))
            }
        }
    }
}

fn pad(rng: &mut impl Rng) -> &'static str {
    if rng.random_bool(0.5) {
        " "
    } else {
        ""
    }
}

pub struct ProgramGen<'a, R: Rng> {
    pub t: &'a GenTable,
    pub rng: &'a mut R,
}

impl<R: Rng> ProgramGen<'_, R> {
    fn col(&self, i: usize) -> Expr {
        Expr::Col(self.t.names[i].clone())
    }

    fn pick(&mut self, cols: &[usize]) -> usize {
        *cols.choose(self.rng).expect("non-empty")
    }

    /// A literal of the column's kind: usually one of its cells.
    fn literal_for(&mut self, c: usize) -> Expr {
        let present: Vec<String> = self.t.cells.iter().filter_map(|r| r[c].clone()).collect();
        if self.rng.random_bool(0.8) {
            if let Some(v) = present.choose(self.rng) {
                return Expr::Lit(v.clone());
            }
        }
        Expr::Lit(match self.t.kinds[c] {
            Kind::Num => number_text(self.rng),
            Kind::Text => "nowhere".into(),
        })
    }

    pub fn rows(&mut self, depth: usize) -> Expr {
        if depth == 0 || self.rng.random_bool(0.3) {
            return Expr::All;
        }
        let nums = self.t.cols_of(Kind::Num);
        let choice = self.rng.random_range(0..if nums.is_empty() { 1 } else { 3 });
        let inner = self.rows(depth - 1);
        match choice {
            0 => {
                let c = self.rng.random_range(0..self.t.names.len());
                let op = if self.rng.random_bool(0.7) { "filter_eq" } else { "filter_not_eq" };
                Expr::Op(op, vec![inner, self.col(c), self.literal_for(c)])
            }
            1 => {
                let c = self.pick(&nums);
                let op = *["filter_greater", "filter_less", "filter_greater_eq", "filter_less_eq"]
                    .choose(self.rng)
                    .expect("non-empty");
                Expr::Op(op, vec![inner, self.col(c), self.literal_for(c)])
            }
            _ => {
                let c = self.pick(&nums);
                let op = if self.rng.random_bool(0.5) { "argmax" } else { "argmin" };
                Expr::Op(op, vec![inner, self.col(c)])
            }
        }
    }

    pub fn number(&mut self, depth: usize) -> Expr {
        let nums = self.t.cols_of(Kind::Num);
        let inner = self.rows(depth.saturating_sub(1));
        if nums.is_empty() || self.rng.random_bool(0.2) {
            return Expr::Op("count", vec![inner]);
        }
        let c = self.pick(&nums);
        let op = *["max", "min", "sum", "avg", "hop"].choose(self.rng).expect("non-empty");
        Expr::Op(op, vec![inner, self.col(c)])
    }

    fn text_value(&mut self, depth: usize) -> Option<(Expr, usize)> {
        let texts = self.t.cols_of(Kind::Text);
        if texts.is_empty() {
            return None;
        }
        let c = self.pick(&texts);
        let inner = self.rows(depth.saturating_sub(1));
        Some((Expr::Op("hop", vec![inner, self.col(c)]), c))
    }

    /// A Boolean program of at most `depth` nested operators.
    pub fn boolean(&mut self, depth: usize) -> Expr {
        let d = depth.saturating_sub(1);
        match self.rng.random_range(0..5) {
            0 if depth > 1 => Expr::Op("and", vec![self.boolean(d), self.boolean(d)]),
            1 => Expr::Op("only", vec![self.rows(d)]),
            2 => {
                if let Some((v, c)) = self.text_value(d) {
                    let rhs = if self.rng.random_bool(0.5) {
                        self.literal_for(c)
                    } else {
                        self.text_value(d).map(|(e, _)| e).unwrap_or_else(|| Expr::Lit("nowhere".into()))
                    };
                    let op = if self.rng.random_bool(0.7) { "eq" } else { "not_eq" };
                    Expr::Op(op, vec![v, rhs])
                } else {
                    Expr::Op("only", vec![self.rows(d)])
                }
            }
            3 => {
                let lhs = self.number(d);
                let rhs = self.number_or_literal(d);
                let op = if self.rng.random_bool(0.5) { "greater" } else { "less" };
                Expr::Op(op, vec![lhs, rhs])
            }
            _ => {
                let lhs = self.number(d);
                let rhs = self.number_or_literal(d);
                let op = if self.rng.random_bool(0.7) { "eq" } else { "not_eq" };
                Expr::Op(op, vec![lhs, rhs])
            }
        }
    }

    fn number_or_literal(&mut self, depth: usize) -> Expr {
        if self.rng.random_bool(0.5) {
            Expr::Lit(number_text(self.rng))
        } else {
            self.number(depth)
        }
    }
}
