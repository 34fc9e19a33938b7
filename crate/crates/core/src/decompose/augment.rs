use std::collections::BTreeMap;

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{DecompositionType, Provenance, PseudoSample, Subproblem};
use crate::lexicon;
use crate::program::{execute, Program, RuntimeValue};
use crate::table::{link_entities, EntityLink, Statement, Table};

/// Replace whole-token occurrences of `from` with `to`.
pub fn replace_phrase(text: &str, from: &str, to: &str) -> String {
    let toks: Vec<&str> = text.split(' ').collect();
    let pat: Vec<&str> = from.split(' ').collect();
    let mut out: Vec<&str> = Vec::with_capacity(toks.len());
    let mut i = 0;
    while i < toks.len() {
        if !pat.is_empty() && toks[i..].starts_with(&pat) {
            out.push(to);
            i += pat.len();
        } else {
            out.push(toks[i]);
            i += 1;
        }
    }
    out.join(" ")
}

fn relabel(program: &Program, t: &Table) -> Option<bool> {
    match execute(program, t) {
        Ok(RuntimeValue::Bool(b)) => Some(b),
        _ => None,
    }
}

/// Replace one linked entity shared by the statement and the program with a
/// different value from the same column, then re-execute for the label.
pub fn augment_entity_swap(
    sample: &PseudoSample,
    t: &Table,
    links: &[EntityLink],
    rng_seed: u64,
) -> Option<PseudoSample> {
    let literals = sample.program.literals();
    let eligible: Vec<&EntityLink> = links
        .iter()
        .filter(|l| literals.contains(&l.surface.as_str()))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let link = *eligible.choose(&mut rng)?;
    let alternatives: Vec<String> = t
        .distinct_values(link.column)
        .into_iter()
        .filter(|v| *v != link.surface)
        .collect();
    let new = alternatives.choose(&mut rng)?.clone();
    let old = link.surface.as_str();

    let swap_lit = |p: Program| match p {
        Program::Literal(l) if l == old => Program::Literal(new.clone()),
        other => other,
    };
    let program = sample.program.map(&swap_lit);
    let label = relabel(&program, t)?;
    let decomposition = sample
        .decomposition
        .iter()
        .map(|s| Subproblem {
            kind: s.kind,
            text: replace_phrase(&s.text, old, &new),
            probe: s.probe.as_ref().map(|p| p.map(&swap_lit)),
        })
        .collect();
    Some(PseudoSample {
        statement_id: format!("{}#swap", sample.statement_id),
        c: sample.c,
        provenance: Provenance::EntitySwap,
        decomposition,
        table_id: sample.table_id.clone(),
        statement: replace_phrase(&sample.statement, old, &new),
        label,
        program,
    })
}

fn swap_antonyms(text: &str) -> (String, bool) {
    let mut changed = false;
    let out: Vec<&str> = text
        .split(' ')
        .map(|w| match lexicon::antonym(w) {
            Some(a) => {
                changed = true;
                a
            }
            None => w,
        })
        .collect();
    (out.join(" "), changed)
}

fn mirror(p: &Program) -> Program {
    p.map(&|q| match q {
        Program::Apply(op, args) => Program::Apply(op.mirrored().unwrap_or(op), args),
        other => other,
    })
}

/// Swap lexicon words for their antonyms and mirror directional operators.
/// Only Superlative and Comparative samples are eligible.
pub fn augment_antonym(sample: &PseudoSample, t: &Table) -> Option<PseudoSample> {
    if !matches!(sample.c, DecompositionType::Superlative | DecompositionType::Comparative) {
        return None;
    }
    let (statement, changed) = swap_antonyms(&sample.statement);
    if !changed {
        return None;
    }
    let program = mirror(&sample.program);
    let label = relabel(&program, t)?;
    let decomposition = sample
        .decomposition
        .iter()
        .map(|s| Subproblem {
            kind: s.kind,
            text: swap_antonyms(&s.text).0,
            probe: s.probe.as_ref().map(mirror),
        })
        .collect();
    Some(PseudoSample {
        statement_id: format!("{}#ant", sample.statement_id),
        c: sample.c,
        provenance: Provenance::Antonym,
        decomposition,
        table_id: sample.table_id.clone(),
        statement,
        label,
        program,
    })
}

/// Original samples followed by up to `volume` entity swaps and one antonym
/// variant per sample. Swap seeds are derived from `seed` and the position.
pub fn augment_dataset(
    samples: &[PseudoSample],
    tables: &BTreeMap<String, Table>,
    volume: usize,
    seed: u64,
) -> Vec<PseudoSample> {
    let mut out = samples.to_vec();
    for (i, s) in samples.iter().enumerate() {
        let Some(t) = tables.get(&s.table_id) else {
            continue;
        };
        let links = link_entities(&Statement::new(&s.statement_id, &s.table_id, &s.statement, None), t);
        for k in 0..volume {
            let derived = seed ^ ((i as u64) << 20) ^ (k as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
            if let Some(mut a) = augment_entity_swap(s, t, &links, derived) {
                if volume > 1 {
                    a.statement_id = format!("{}{k}", a.statement_id);
                }
                out.push(a);
            }
        }
        if volume > 0 {
            out.extend(augment_antonym(s, t));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompose::{instantiate_template, SubKind};
    use crate::program::parse_program;

    fn table() -> Table {
        Table::from_csv_reader(
            "venues",
            "venue,attendance\nfirhill,9500\ncappielow,8000\nlove street,6500\n".as_bytes(),
        )
        .unwrap()
    }

    fn venues_sample() -> PseudoSample {
        let text = "firhill had the highest attendance";
        let program = parse_program("eq{max{all_rows;attendance};hop{filter_eq{all_rows;venue;firhill};attendance}}").unwrap();
        let s = Statement::new("s1", "venues", text, Some(true));
        PseudoSample {
            statement_id: "s1".into(),
            c: DecompositionType::Superlative,
            provenance: Provenance::Original,
            decomposition: instantiate_template(&s, &program, DecompositionType::Superlative).unwrap(),
            table_id: "venues".into(),
            statement: text.into(),
            label: true,
            program,
        }
    }

    #[test]
    fn whole_token_replacement() {
        assert_eq!(replace_phrase("love street is love streets", "love street", "firhill"), "firhill is love streets");
    }

    #[test]
    fn entity_swap_relabels() {
        let t = table();
        let s = venues_sample();
        let st = Statement::new("s1", "venues", &s.statement, None);
        let links = link_entities(&st, &t);
        let mut seen = Vec::new();
        for seed in 0..20 {
            let a = augment_entity_swap(&s, &t, &links, seed).unwrap();
            assert_eq!(a.provenance, Provenance::EntitySwap);
            assert!(!a.label);
            assert_eq!(execute(&a.program, &t).unwrap(), RuntimeValue::Bool(a.label));
            assert!(!a.statement.contains("firhill"));
            assert!(a.decomposition[1].text.contains(a.program.literals()[0]));
            seen.push(a.statement);
        }
        assert!(seen.iter().any(|s| s.starts_with("cappielow")));
        assert_eq!(
            augment_entity_swap(&s, &t, &links, 7),
            augment_entity_swap(&s, &t, &links, 7)
        );
    }

    #[test]
    fn single_value_column_has_no_swap() {
        let t = Table::from_csv_reader("one", "venue,attendance\nfirhill,9500\n".as_bytes()).unwrap();
        let s = venues_sample();
        let links = link_entities(&Statement::new("s1", "one", &s.statement, None), &t);
        assert_eq!(augment_entity_swap(&s, &t, &links, 0), None);
    }

    #[test]
    fn antonym_is_an_involution() {
        let t = table();
        let s = venues_sample();
        let a = augment_antonym(&s, &t).unwrap();
        assert_eq!(a.statement, "firhill had the lowest attendance");
        assert_eq!(a.program.to_string(), "eq{min{all_rows;attendance};hop{filter_eq{all_rows;venue;firhill};attendance}}");
        assert!(!a.label);
        assert_eq!(a.decomposition[0].text, "what is the minimum attendance ?");
        let b = augment_antonym(&a, &t).unwrap();
        assert_eq!(b.statement, s.statement);
        assert_eq!(b.program, s.program);
        assert!(b.label);
    }

    #[test]
    fn antonym_type_gate() {
        let mut s = venues_sample();
        s.c = DecompositionType::Conjunction;
        assert_eq!(augment_antonym(&s, &table()), None);
        assert_eq!(s.decomposition[0].kind, SubKind::Question);
    }
}
