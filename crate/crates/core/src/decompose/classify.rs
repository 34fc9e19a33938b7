use super::DecompositionType;
use crate::lexicon;
use crate::program::{Operator, Skeleton};
use crate::table::Statement;

fn is_extremum(op: Operator) -> bool {
    matches!(op, Operator::Max | Operator::Min | Operator::Argmax | Operator::Argmin)
}

/// Type of a program skeleton. Rules are tried in the order
/// Uniqueness, Superlative, Comparative, Conjunction; the first match wins.
pub fn classify_skeleton(sk: &Skeleton) -> DecompositionType {
    use DecompositionType::*;
    let Some(root) = sk.op() else {
        return Atomic;
    };
    let args = sk.args();
    let count_sides = args.iter().filter(|a| a.op() == Some(Operator::Count)).count();
    let uniqueness = match root {
        Operator::Only => true,
        Operator::Eq | Operator::NotEq => count_sides == 1,
        Operator::And => args.iter().any(|a| a.op() == Some(Operator::Only)),
        _ => false,
    };
    if uniqueness {
        return Uniqueness;
    }
    if root == Operator::Eq && args.iter().filter(|a| a.contains_op(&is_extremum)).count() == 1 {
        return Superlative;
    }
    match root {
        Operator::Greater | Operator::Less => Comparative,
        Operator::And => Conjunction,
        _ => Atomic,
    }
}

/// Lexical type detection for statements without a usable program.
pub fn detect_type_text(s: &Statement) -> DecompositionType {
    use DecompositionType::*;
    let toks = s.tokens();
    if toks.iter().any(|t| matches!(*t, "only" | "unique")) {
        return Uniqueness;
    }
    if toks.iter().any(|t| lexicon::is_superlative_word(t)) {
        return Superlative;
    }
    if lexicon::has_comparative_phrase(&toks) {
        return Comparative;
    }
    let clause_and = toks.iter().enumerate().any(|(i, t)| {
        *t == "and"
            && toks[..i].iter().any(|w| lexicon::is_verb_like(w))
            && toks[i + 1..].iter().any(|w| lexicon::is_verb_like(w))
    });
    if clause_and {
        return Conjunction;
    }
    Atomic
}
