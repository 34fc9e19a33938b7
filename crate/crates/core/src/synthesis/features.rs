use std::collections::{BTreeMap, BTreeSet};

use crate::lexicon::{self, Trigger};
use crate::program::{Operator, Program};
use crate::table::{link_entities, EntityLink, Statement, Table};

/// Sparse feature vector keyed by feature name.
pub type Features = BTreeMap<String, f64>;

/// Statement-side information reused across all candidates of one statement.
#[derive(Debug, Clone)]
pub struct StatementContext {
    pub tokens: Vec<String>,
    pub triggers: BTreeSet<Trigger>,
    pub links: Vec<EntityLink>,
    cell_surfaces: BTreeSet<String>,
}

impl StatementContext {
    pub fn new(s: &Statement, t: &Table) -> StatementContext {
        let tokens: Vec<String> = s.tokens().iter().map(|w| w.to_string()).collect();
        let refs: Vec<&str> = tokens.iter().map(String::as_str).collect();
        let cell_surfaces = t
            .rows
            .iter()
            .flatten()
            .filter(|c| !c.is_missing())
            .map(|c| c.surface.clone())
            .collect();
        StatementContext {
            triggers: lexicon::triggers(&refs),
            links: link_entities(s, t),
            tokens,
            cell_surfaces,
        }
    }

    /// First token position where the space-separated phrase occurs.
    fn position(&self, phrase: &str) -> Option<usize> {
        let words: Vec<&str> = phrase.split(' ').collect();
        if words.is_empty() || words.len() > self.tokens.len() {
            return None;
        }
        (0..=self.tokens.len() - words.len())
            .find(|&i| words.iter().zip(&self.tokens[i..]).all(|(w, t)| w == t))
    }

    /// First position of any word of a column name.
    fn column_position(&self, name: &str) -> Option<usize> {
        name.split(' ')
            .filter_map(|w| self.tokens.iter().position(|t| t == w))
            .min()
    }
}

fn is_comparison(op: Operator) -> bool {
    op.is_filter() || matches!(op, Operator::Eq | Operator::NotEq | Operator::Greater | Operator::Less)
}

/// Mentions of a comparison node's direct literals and columns, including
/// those of its immediate value arguments.
fn node_mentions(ctx: &StatementContext, node: &Program) -> Vec<usize> {
    let mut out = Vec::new();
    let mut visit = |p: &Program| match p {
        Program::Literal(l) => out.extend(ctx.position(l)),
        Program::Column(c) => out.extend(ctx.column_position(c)),
        _ => {}
    };
    for a in node.args() {
        visit(a);
        if matches!(a.op(), Some(op) if !op.is_filter() && op != Operator::Argmax && op != Operator::Argmin) {
            for b in a.args() {
                visit(b);
            }
        }
    }
    out
}

pub fn featurize(ctx: &StatementContext, z: &Program) -> Features {
    let mut f = Features::new();
    let ops: BTreeSet<Operator> = z.operators().into_iter().collect();
    for op in &ops {
        f.insert(format!("op:{}", op.name()), 1.0);
        for tr in &ctx.triggers {
            f.insert(format!("op:{}×trig:{}", op.name(), tr.name()), 1.0);
        }
    }
    f.insert(format!("depth:{}", z.depth()), 1.0);

    let literals = z.literals();
    if !ctx.links.is_empty() {
        let used = ctx
            .links
            .iter()
            .filter(|l| literals.contains(&l.surface.as_str()))
            .count();
        f.insert("link_frac".into(), used as f64 / ctx.links.len() as f64);
    }
    let grounded = literals.iter().filter(|l| ctx.cell_surfaces.contains(**l)).count();
    if grounded > 0 {
        f.insert("grounded_literals".into(), grounded as f64);
    }

    let mut cols: Vec<&str> = z.columns();
    cols.sort();
    cols.dedup();
    if !cols.is_empty() {
        let mentioned = cols.iter().filter(|c| ctx.column_position(c).is_some()).count();
        f.insert("col_mention_frac".into(), mentioned as f64 / cols.len() as f64);
    }

    let mut locality = Vec::new();
    z.walk(&mut |p| {
        if matches!(p.op(), Some(op) if is_comparison(op)) {
            let m = node_mentions(ctx, p);
            let v = match (m.iter().min(), m.iter().max()) {
                (Some(lo), Some(hi)) if m.len() >= 2 => ((m.len() - 1) as f64 / (hi - lo).max(1) as f64).min(1.0),
                _ => 0.0,
            };
            locality.push(v);
        }
    });
    if !locality.is_empty() {
        let mean = locality.iter().sum::<f64>() / locality.len() as f64;
        if mean > 0.0 {
            f.insert("locality".into(), mean);
        }
    }

    let positions: Vec<usize> = literals.iter().filter_map(|l| ctx.position(l)).collect();
    if positions.len() >= 2 {
        let ordered = positions.windows(2).filter(|w| w[0] < w[1]).count();
        f.insert("literal_order".into(), ordered as f64 / (positions.len() - 1) as f64);
    }
    f
}
