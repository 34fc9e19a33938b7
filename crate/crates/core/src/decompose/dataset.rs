use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{classify_skeleton, instantiate_template, DecompositionType, Provenance, PseudoSample};
use crate::program::{execute, skeleton, Program, RuntimeValue};
use crate::table::{Statement, Table};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DropCounts {
    pub held_out: usize,
    pub atomic: usize,
    pub template: usize,
    pub execution: usize,
}

enum Outcome {
    Kept(PseudoSample),
    HeldOut,
    Atomic,
    Template,
    Execution,
}

fn build_one(t: &Table, s: &Statement, z: &Program, held_out: &BTreeSet<String>) -> Outcome {
    if held_out.contains(&s.id) {
        return Outcome::HeldOut;
    }
    let c = classify_skeleton(&skeleton(z));
    if c == DecompositionType::Atomic {
        return Outcome::Atomic;
    }
    let Ok(decomposition) = instantiate_template(s, z, c) else {
        return Outcome::Template;
    };
    let Ok(RuntimeValue::Bool(label)) = execute(z, t) else {
        return Outcome::Execution;
    };
    Outcome::Kept(PseudoSample {
        statement_id: s.id.clone(),
        c,
        provenance: Provenance::Original,
        decomposition,
        table_id: t.id.clone(),
        statement: s.text.clone(),
        label,
        program: z.clone(),
    })
}

/// Classify each selected program, fill its template, and keep the
/// non-atomic results. Statements in `held_out` never contribute.
/// Output is sorted by statement id.
pub fn build_pseudo_dataset(
    triples: &[(&Table, &Statement, &Program)],
    held_out: &BTreeSet<String>,
) -> (Vec<PseudoSample>, DropCounts) {
    let outcomes: Vec<Outcome> = triples
        .par_iter()
        .map(|(t, s, z)| build_one(t, s, z, held_out))
        .collect();
    let mut drops = DropCounts::default();
    let mut samples = Vec::new();
    for o in outcomes {
        match o {
            Outcome::Kept(p) => samples.push(p),
            Outcome::HeldOut => drops.held_out += 1,
            Outcome::Atomic => drops.atomic += 1,
            Outcome::Template => drops.template += 1,
            Outcome::Execution => drops.execution += 1,
        }
    }
    samples.sort_by(|a, b| a.statement_id.cmp(&b.statement_id));
    (samples, drops)
}
