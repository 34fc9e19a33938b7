use super::{
    classify_skeleton, detect_type_text, instantiate_template, verbalize_claim, verbalize_question, DecompositionType,
    SubKind, Subproblem,
};
use crate::lexicon;
use crate::program::{execute, is_splittable, skeleton, Operator, Program, RuntimeValue};
use crate::synthesis::{featurize, select_program, CandidateSet, SelectorModel, StatementContext};
use crate::table::{parse_number, ColumnKind, EntityLink, Statement, Table};

fn contains_phrase(tokens: &[&str], phrase: &str) -> bool {
    let pat: Vec<&str> = phrase.split(' ').collect();
    !pat.is_empty() && tokens.windows(pat.len()).any(|w| w == pat.as_slice())
}

/// Keep the decomposition only if every subproblem names a column or cell
/// of `t`, differs from the statement text, and has a probe that executes
/// to the right kind of value. Otherwise return nothing.
pub fn filter_wellformed(subs: Vec<Subproblem>, t: &Table, statement: &str) -> Vec<Subproblem> {
    let ok = |sub: &Subproblem| {
        let toks: Vec<&str> = sub.text.split(' ').collect();
        let informative = t.columns.iter().any(|c| contains_phrase(&toks, &c.name))
            || t.rows
                .iter()
                .flatten()
                .any(|c| !c.is_missing() && contains_phrase(&toks, &c.surface));
        let probe_ok = match (&sub.probe, sub.kind) {
            (None, _) => true,
            (Some(p), SubKind::Statement) => matches!(execute(p, t), Ok(RuntimeValue::Bool(_))),
            (Some(p), SubKind::Question) => matches!(
                execute(p, t),
                Ok(RuntimeValue::Number(_) | RuntimeValue::Text(_) | RuntimeValue::Date(_))
            ),
        };
        !sub.text.trim().is_empty() && informative && sub.text != statement && probe_ok
    };
    if subs.iter().all(ok) {
        subs
    } else {
        Vec::new()
    }
}

fn hop_eq(k: &str, v: &str, c: &str) -> Program {
    Program::apply(
        Operator::Hop,
        vec![
            Program::apply(Operator::FilterEq, vec![Program::AllRows, Program::col(k), Program::lit(v)]),
            Program::col(c),
        ],
    )
}

fn ask(p: Program) -> Option<Subproblem> {
    Some(Subproblem::question(verbalize_question(&p)?, p))
}

/// Pattern-based decomposition from the text type, column mentions, and
/// entity links.
fn fallback(s: &Statement, t: &Table, links: &[EntityLink]) -> Option<(DecompositionType, Vec<Subproblem>)> {
    let c = detect_type_text(s);
    let toks = s.tokens();
    let mentioned: Vec<usize> = (0..t.n_cols())
        .filter(|&i| t.columns[i].name.split(' ').any(|w| toks.contains(&w)))
        .collect();
    let numeric = mentioned.iter().copied().find(|&i| t.columns[i].kind == ColumnKind::Number);
    let name = |i: usize| t.columns[i].name.as_str();
    let subs = match c {
        DecompositionType::Comparative => {
            let col = numeric?;
            let keys: Vec<&EntityLink> = links.iter().filter(|l| l.column != col).take(2).collect();
            if keys.len() < 2 {
                return None;
            }
            vec![
                ask(hop_eq(name(keys[0].column), &keys[0].surface, name(col)))?,
                ask(hop_eq(name(keys[1].column), &keys[1].surface, name(col)))?,
            ]
        }
        DecompositionType::Superlative => {
            let col = numeric?;
            let key = links.iter().find(|l| l.column != col)?;
            let (max, _) = lexicon::superlative_direction(&toks);
            let agg = if max { Operator::Max } else { Operator::Min };
            vec![
                ask(Program::apply(agg, vec![Program::AllRows, Program::col(name(col))]))?,
                ask(hop_eq(name(key.column), &key.surface, name(col)))?,
            ]
        }
        DecompositionType::Uniqueness => {
            let key = links.first()?;
            let rows = Program::apply(
                Operator::FilterEq,
                vec![Program::AllRows, Program::col(name(key.column)), Program::lit(&key.surface)],
            );
            let col = numeric.filter(|&i| i != key.column)?;
            let x = toks.iter().find(|w| parse_number(w).is_some())?;
            let claim = Program::apply(
                Operator::Eq,
                vec![hop_eq(name(key.column), &key.surface, name(col)), Program::lit(x)],
            );
            vec![
                ask(Program::apply(Operator::Count, vec![rows]))?,
                Subproblem::statement(verbalize_claim(&claim)?, claim),
            ]
        }
        _ => return None,
    };
    Some((c, subs))
}

/// Highest-scoring splittable candidate whose skeleton classifies as `c`.
fn best_of_type(m: &SelectorModel, ctx: &StatementContext, cs: &CandidateSet, c: DecompositionType) -> Option<Program> {
    let mut chosen: Option<(&Program, f64)> = None;
    for cand in &cs.candidates {
        if !is_splittable(&cand.program) || classify_skeleton(&skeleton(&cand.program)) != c {
            continue;
        }
        let score = m.score(&featurize(ctx, &cand.program));
        if chosen.is_none_or(|(_, top)| score > top) {
            chosen = Some((&cand.program, score));
        }
    }
    chosen.map(|(p, _)| p.clone())
}

/// Decompose via a selected program when one exists, else by text
/// patterns. Returns `(Atomic, [])` when neither route applies.
///
/// With a label, the program is the label-consistent selection. Without
/// one (inference), the type is predicted from the text first; atomic
/// statements are not decomposed and the others take the best-scoring
/// candidate of the predicted type.
pub fn decompose_statement(
    s: &Statement,
    t: &Table,
    m: &SelectorModel,
    cs: &CandidateSet,
) -> (DecompositionType, Vec<Subproblem>) {
    let ctx = StatementContext::new(s, t);
    let chosen = match s.label {
        Some(l) => select_program(m, &ctx, Some(l), cs),
        None => match detect_type_text(s) {
            DecompositionType::Atomic => return (DecompositionType::Atomic, Vec::new()),
            c => best_of_type(m, &ctx, cs, c),
        },
    };
    if let Some(z) = chosen {
        let c = classify_skeleton(&skeleton(&z));
        if let Ok(subs) = instantiate_template(s, &z, c) {
            return (c, subs);
        }
    }
    fallback(s, t, &ctx.links).unwrap_or((DecompositionType::Atomic, Vec::new()))
}
