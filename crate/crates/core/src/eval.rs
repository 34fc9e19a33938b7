//! BLEU-4, accuracy breakdowns, and decomposition coverage.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::decompose::DecompositionType;
use crate::table::{Split, Subset};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricError {
    #[error("empty corpus")]
    Empty,
    #[error("{what}: expected {expected} items, found {found}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
}

fn check_len(what: &'static str, expected: usize, found: usize) -> Result<(), MetricError> {
    if expected == found {
        Ok(())
    } else {
        Err(MetricError::LengthMismatch { what, expected, found })
    }
}

fn ngram_counts<S: AsRef<str>>(toks: &[S], n: usize) -> HashMap<Vec<&str>, usize> {
    let mut out = HashMap::new();
    if toks.len() >= n {
        for w in toks.windows(n) {
            *out.entry(w.iter().map(AsRef::as_ref).collect()).or_insert(0) += 1;
        }
    }
    out
}

/// (clipped matches, hypothesis n-grams) for n = 1..=4.
fn match_stats<S: AsRef<str>, R: AsRef<str>>(hyp: &[S], reference: &[R]) -> [(usize, usize); 4] {
    let mut out = [(0, 0); 4];
    for (n, slot) in (1..=4).zip(out.iter_mut()) {
        let h = ngram_counts(hyp, n);
        let r = ngram_counts(reference, n);
        let matched = h.iter().map(|(g, c)| (*c).min(r.get(g).copied().unwrap_or(0))).sum();
        *slot = (matched, hyp.len().saturating_sub(n - 1));
    }
    out
}

fn brevity(c: usize, r: usize) -> f64 {
    if c >= r {
        1.0
    } else {
        (1.0 - r as f64 / c as f64).exp()
    }
}

/// Corpus-level BLEU-4: clipped n-gram precisions pooled over the corpus,
/// uniform geometric mean, brevity penalty. No smoothing, so any zero
/// precision gives 0.
pub fn bleu4<S: AsRef<str>, R: AsRef<str>>(hyps: &[Vec<S>], refs: &[Vec<R>]) -> Result<f64, MetricError> {
    check_len("references", hyps.len(), refs.len())?;
    if hyps.is_empty() {
        return Err(MetricError::Empty);
    }
    let mut totals = [(0usize, 0usize); 4];
    let (mut c, mut r) = (0, 0);
    for (h, rf) in hyps.iter().zip(refs) {
        for (t, s) in totals.iter_mut().zip(match_stats(h, rf)) {
            t.0 += s.0;
            t.1 += s.1;
        }
        c += h.len();
        r += rf.len();
    }
    if totals.iter().any(|&(m, _)| m == 0) {
        return Ok(0.0);
    }
    let log_p: f64 = totals.iter().map(|&(m, n)| (m as f64 / n as f64).ln()).sum::<f64>() / 4.0;
    Ok(brevity(c, r) * log_p.exp())
}

/// Mean sentence-level BLEU-4 with add-one smoothing on the 2- to 4-gram
/// precisions.
pub fn bleu4_sentence_smoothed<S: AsRef<str>, R: AsRef<str>>(
    hyps: &[Vec<S>],
    refs: &[Vec<R>],
) -> Result<f64, MetricError> {
    check_len("references", hyps.len(), refs.len())?;
    if hyps.is_empty() {
        return Err(MetricError::Empty);
    }
    let total: f64 = hyps
        .iter()
        .zip(refs)
        .map(|(h, rf)| {
            let stats = match_stats(h, rf);
            if h.is_empty() || stats[0].0 == 0 {
                return 0.0;
            }
            let log_p: f64 = stats
                .iter()
                .enumerate()
                .map(|(i, &(m, n))| {
                    if i == 0 {
                        (m as f64 / n as f64).ln()
                    } else {
                        ((m + 1) as f64 / (n + 1) as f64).ln()
                    }
                })
                .sum::<f64>()
                / 4.0;
            brevity(h.len(), rf.len()) * log_p.exp()
        })
        .sum();
    Ok(total / hyps.len() as f64)
}

/// Whitespace tokenization of already-normalized text.
pub fn tokenize(text: &str) -> Vec<&str> {
    text.split_whitespace().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TypeAccuracy {
    pub accuracy: f64,
    /// Fraction of all statements with this type.
    pub share: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub overall: f64,
    pub count: usize,
    pub per_type: BTreeMap<DecompositionType, TypeAccuracy>,
    pub per_split: BTreeMap<Split, f64>,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn accuracy_report(
    preds: &[bool],
    labels: &[bool],
    types: &[DecompositionType],
    splits: &[Split],
) -> Result<AccuracyReport, MetricError> {
    let n = preds.len();
    check_len("labels", n, labels.len())?;
    check_len("types", n, types.len())?;
    check_len("splits", n, splits.len())?;
    if n == 0 {
        return Err(MetricError::Empty);
    }
    let mut by_type: BTreeMap<DecompositionType, (usize, usize)> = BTreeMap::new();
    let mut by_split: BTreeMap<Split, (usize, usize)> = BTreeMap::new();
    let mut correct = 0;
    for i in 0..n {
        let ok = (preds[i] == labels[i]) as usize;
        correct += ok;
        let t = by_type.entry(types[i]).or_default();
        t.0 += ok;
        t.1 += 1;
        let s = by_split.entry(splits[i]).or_default();
        s.0 += ok;
        s.1 += 1;
    }
    Ok(AccuracyReport {
        overall: ratio(correct, n),
        count: n,
        per_type: by_type
            .into_iter()
            .map(|(k, (c, m))| {
                (
                    k,
                    TypeAccuracy {
                        accuracy: ratio(c, m),
                        share: ratio(m, n),
                        count: m,
                    },
                )
            })
            .collect(),
        per_split: by_split.into_iter().map(|(k, (c, m))| (k, ratio(c, m))).collect(),
    })
}

/// Percent of statements with a valid decomposition, per split and per
/// test subset. Empty groups report 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coverage {
    pub train: f64,
    pub val: f64,
    pub test: f64,
    pub simple: f64,
    pub complex: f64,
}

impl Coverage {
    pub const COLUMNS: [&'static str; 5] = ["train", "val", "test", "simple", "complex"];

    pub fn values(&self) -> [f64; 5] {
        [self.train, self.val, self.test, self.simple, self.complex]
    }
}

pub fn coverage_report(
    valid: &BTreeMap<String, bool>,
    split_of: &BTreeMap<String, Split>,
    subset_of: &BTreeMap<String, Subset>,
) -> Coverage {
    let pct = |members: Vec<&String>| {
        let hits = members.iter().filter(|id| valid.get(**id).copied().unwrap_or(false)).count();
        100.0 * ratio(hits, members.len())
    };
    let split = |s: Split| pct(split_of.iter().filter(|(_, v)| **v == s).map(|(k, _)| k).collect());
    let subset = |s: Subset| pct(subset_of.iter().filter(|(_, v)| **v == s).map(|(k, _)| k).collect());
    Coverage {
        train: split(Split::Train),
        val: split(Split::Val),
        test: split(Split::Test),
        simple: subset(Subset::Simple),
        complex: subset(Subset::Complex),
    }
}
