//! Grammar-directed candidate enumeration grounded in the statement.
//!
//! Literals come only from linked cells and numerals in the statement;
//! columns only from those named in the statement or holding a linked cell.
//! Operators beyond `filter_eq`, `hop` and `eq` are enabled by trigger words.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::lexicon::{self, Trigger};
use crate::program::{execute, Operator, Program, RuntimeValue};
use crate::table::{parse_number, ColumnKind, EntityLink, Statement, Table};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub program: Program,
    pub exec: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSet {
    pub statement_id: String,
    pub candidates: Vec<Candidate>,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn contains(&self, p: &Program) -> bool {
        self.candidates.iter().any(|c| &c.program == p)
    }
}

pub const DEFAULT_BUDGET: usize = 200;
pub const DEFAULT_MAX_DEPTH: usize = 4;

#[derive(Debug, Clone, Copy)]
struct Gates {
    max: bool,
    min: bool,
    more: bool,
    less: bool,
    count: bool,
    sum: bool,
    avg: bool,
    only: bool,
    and: bool,
    neg: bool,
}

impl Gates {
    fn from_tokens(tokens: &[&str]) -> Gates {
        let tr = lexicon::triggers(tokens);
        let (max, min) = lexicon::superlative_direction(tokens);
        let (more, less) = lexicon::comparative_direction(tokens);
        Gates {
            max,
            min,
            more,
            less,
            count: tr.contains(&Trigger::Count),
            sum: tr.contains(&Trigger::Sum),
            avg: tr.contains(&Trigger::Avg),
            only: tr.contains(&Trigger::Only),
            and: tr.contains(&Trigger::And),
            neg: tr.contains(&Trigger::Negation),
        }
    }
}

struct Grounding<'t> {
    table: &'t Table,
    /// Column indices, ascending.
    columns: Vec<usize>,
    /// (column, surface) of linked cells.
    linked: Vec<(usize, String)>,
    numerals: Vec<String>,
    gates: Gates,
}

impl Grounding<'_> {
    fn name(&self, c: usize) -> Program {
        Program::Column(self.table.columns[c].name.clone())
    }

    fn kind(&self, c: usize) -> ColumnKind {
        self.table.columns[c].kind
    }

    /// Literals that may stand opposite column `c`.
    fn literals_for(&self, c: usize) -> Vec<String> {
        match self.kind(c) {
            ColumnKind::Number => self.numerals.clone(),
            _ => self
                .linked
                .iter()
                .filter(|(col, _)| *col == c)
                .map(|(_, s)| s.clone())
                .collect(),
        }
    }

    fn filters_over(&self, base: &Program, skip_col: Option<usize>) -> Vec<(Program, usize)> {
        let g = self.gates;
        let mut out = Vec::new();
        for &c in &self.columns {
            if Some(c) == skip_col {
                continue;
            }
            let numeric = self.kind(c) == ColumnKind::Number;
            for lit in self.literals_for(c) {
                let mut ops = vec![Operator::FilterEq];
                if g.neg {
                    ops.push(Operator::FilterNotEq);
                }
                if numeric && g.more {
                    ops.extend([Operator::FilterGreater, Operator::FilterGreaterEq]);
                }
                if numeric && g.less {
                    ops.extend([Operator::FilterLess, Operator::FilterLessEq]);
                }
                for op in ops {
                    let p = Program::apply(op, vec![base.clone(), self.name(c), Program::Literal(lit.clone())]);
                    out.push((p, c));
                }
            }
        }
        out
    }

    fn numeric_columns(&self) -> impl Iterator<Item = usize> + '_ {
        self.columns
            .iter()
            .copied()
            .filter(|&c| self.kind(c) == ColumnKind::Number)
    }
}

/// Value expression plus the column it reads (None for `count`).
struct Value {
    program: Program,
    column: Option<usize>,
    kind: ColumnKind,
    is_hop: bool,
    /// Hop over a single filter or argmax on `all_rows`.
    simple_hop: bool,
    is_count: bool,
}

pub fn enumerate_candidates(
    s: &Statement,
    t: &Table,
    links: &[EntityLink],
    budget: usize,
) -> CandidateSet {
    enumerate_with_depth(s, t, links, budget, DEFAULT_MAX_DEPTH)
}

pub fn enumerate_with_depth(
    s: &Statement,
    t: &Table,
    links: &[EntityLink],
    budget: usize,
    max_depth: usize,
) -> CandidateSet {
    let tokens = s.tokens();
    let token_set: BTreeSet<&str> = tokens.iter().copied().collect();

    let mut linked: Vec<(usize, String)> = Vec::new();
    for l in links {
        let entry = (l.column, l.surface.clone());
        if !linked.contains(&entry) {
            linked.push(entry);
        }
    }
    let columns: Vec<usize> = (0..t.n_cols())
        .filter(|&c| {
            t.columns[c].name.split(' ').any(|w| token_set.contains(w))
                || linked.iter().any(|(col, _)| *col == c)
        })
        .collect();
    let mut numerals: Vec<String> = Vec::new();
    for tok in &tokens {
        if parse_number(tok).is_some() && !numerals.iter().any(|n| n == tok) {
            numerals.push(tok.to_string());
        }
    }
    let g = Grounding {
        table: t,
        columns,
        linked,
        numerals,
        gates: Gates::from_tokens(&tokens),
    };
    let programs = grammar(&g);

    let mut keyed: Vec<(usize, String, Program)> = programs
        .into_iter()
        .map(|p| (p.depth(), p.to_string(), p))
        .filter(|(d, _, _)| *d <= max_depth)
        .collect();
    keyed.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
    keyed.dedup_by(|a, b| a.1 == b.1);

    let mut candidates = Vec::new();
    for (_, _, program) in keyed {
        if candidates.len() >= budget {
            break;
        }
        if let Ok(RuntimeValue::Bool(exec)) = execute(&program, t) {
            candidates.push(Candidate { program, exec });
        }
    }
    CandidateSet {
        statement_id: s.id.clone(),
        candidates,
    }
}

fn grammar(g: &Grounding<'_>) -> Vec<Program> {
    let gt = g.gates;
    let all = Program::AllRows;

    // Row sets: single filters / argmax over all_rows, then one more filter.
    let level1 = g.filters_over(&all, None);
    let mut rowsets: Vec<(Program, Option<usize>, bool)> = Vec::new();
    for (p, c) in &level1 {
        rowsets.push((p.clone(), Some(*c), true));
    }
    for c in g.numeric_columns() {
        for (on, op) in [(gt.max, Operator::Argmax), (gt.min, Operator::Argmin)] {
            if on {
                rowsets.push((Program::apply(op, vec![all.clone(), g.name(c)]), Some(c), true));
            }
        }
    }
    for (inner, c) in &level1 {
        for (p, _) in g.filters_over(inner, Some(*c)) {
            rowsets.push((p, Some(*c), false));
        }
    }

    let mut values: Vec<Value> = Vec::new();
    for (r, filter_col, simple) in &rowsets {
        for &c in &g.columns {
            if Some(c) == *filter_col {
                continue;
            }
            values.push(Value {
                program: Program::apply(Operator::Hop, vec![r.clone(), g.name(c)]),
                column: Some(c),
                kind: g.kind(c),
                is_hop: true,
                simple_hop: *simple,
                is_count: false,
            });
        }
    }
    let agg_ops: Vec<Operator> = [
        (gt.max, Operator::Max),
        (gt.min, Operator::Min),
        (gt.sum, Operator::Sum),
        (gt.avg, Operator::Avg),
    ]
    .into_iter()
    .filter_map(|(on, op)| on.then_some(op))
    .collect();
    for op in &agg_ops {
        for c in g.numeric_columns() {
            let bases = std::iter::once(all.clone())
                .chain(level1.iter().filter(|(_, fc)| *fc != c).map(|(p, _)| p.clone()));
            for base in bases {
                values.push(Value {
                    program: Program::apply(*op, vec![base, g.name(c)]),
                    column: Some(c),
                    kind: ColumnKind::Number,
                    is_hop: false,
                    simple_hop: false,
                    is_count: false,
                });
            }
        }
    }
    if gt.count {
        let bases = std::iter::once(all.clone()).chain(rowsets.iter().map(|(p, _, _)| p.clone()));
        for base in bases {
            values.push(Value {
                program: Program::apply(Operator::Count, vec![base]),
                column: None,
                kind: ColumnKind::Number,
                is_hop: false,
                simple_hop: false,
                is_count: true,
            });
        }
    }

    let mut bools: Vec<Program> = Vec::new();
    let mut conjuncts: Vec<Program> = Vec::new();
    let eq_ops: Vec<Operator> = if gt.neg {
        vec![Operator::Eq, Operator::NotEq]
    } else {
        vec![Operator::Eq]
    };
    let cmp_ops: Vec<Operator> = [(gt.more, Operator::Greater), (gt.less, Operator::Less)]
        .into_iter()
        .filter_map(|(on, op)| on.then_some(op))
        .collect();

    // Comparisons against a literal.
    for v in &values {
        let lits = match v.column {
            Some(c) if v.is_hop => g.literals_for(c),
            _ => g.numerals.clone(),
        };
        for lit in &lits {
            for op in &eq_ops {
                let p = Program::apply(*op, vec![v.program.clone(), Program::Literal(lit.clone())]);
                if v.simple_hop || v.is_count {
                    conjuncts.push(p.clone());
                }
                bools.push(p);
            }
            if v.kind == ColumnKind::Number {
                for op in &cmp_ops {
                    let p = Program::apply(*op, vec![v.program.clone(), Program::Literal(lit.clone())]);
                    if v.simple_hop {
                        conjuncts.push(p.clone());
                    }
                    bools.push(p);
                }
            }
        }
    }

    // Comparisons between two value expressions over the same column.
    for (i, a) in values.iter().enumerate() {
        for (j, b) in values.iter().enumerate() {
            if i == j {
                continue;
            }
            let same_col = a.column.is_some() && a.column == b.column;
            // aggregate vs hop, e.g. eq{max{..;c};hop{..;c}}
            if !a.is_hop && !a.is_count && b.is_hop && same_col {
                for op in &eq_ops {
                    bools.push(Program::apply(*op, vec![a.program.clone(), b.program.clone()]));
                }
            }
            if a.is_hop && b.is_hop && a.simple_hop && b.simple_hop && same_col {
                if i < j {
                    for op in &eq_ops {
                        bools.push(Program::apply(*op, vec![a.program.clone(), b.program.clone()]));
                    }
                }
                if a.kind == ColumnKind::Number {
                    for op in &cmp_ops {
                        bools.push(Program::apply(*op, vec![a.program.clone(), b.program.clone()]));
                    }
                }
            }
            if a.is_count && b.is_count && i < j {
                for op in &eq_ops {
                    bools.push(Program::apply(*op, vec![a.program.clone(), b.program.clone()]));
                }
                for op in &cmp_ops {
                    bools.push(Program::apply(*op, vec![a.program.clone(), b.program.clone()]));
                }
            }
        }
    }

    if gt.only {
        for (r, _, simple) in &rowsets {
            let p = Program::apply(Operator::Only, vec![r.clone()]);
            if *simple {
                conjuncts.push(p.clone());
            }
            bools.push(p);
        }
    }

    if gt.and {
        for (i, a) in conjuncts.iter().enumerate() {
            for (j, b) in conjuncts.iter().enumerate() {
                if i != j {
                    bools.push(Program::apply(Operator::And, vec![a.clone(), b.clone()]));
                }
            }
        }
    }
    bools
}
