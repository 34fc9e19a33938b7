use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::enumerate::{Candidate, CandidateSet};
use super::features::{featurize, Features, StatementContext};
use crate::program::{is_splittable, Program};

pub const DEFAULT_GAMMA: f64 = 0.2;

/// Linear scorer over program features; `gamma` is the training margin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectorModel {
    pub gamma: f64,
    #[serde(flatten)]
    pub weights: BTreeMap<String, f64>,
}

impl Default for SelectorModel {
    fn default() -> Self {
        SelectorModel {
            gamma: DEFAULT_GAMMA,
            weights: BTreeMap::new(),
        }
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl SelectorModel {
    pub fn logit(&self, f: &Features) -> f64 {
        f.iter()
            .map(|(k, v)| self.weights.get(k).copied().unwrap_or(0.0) * v)
            .sum()
    }

    /// Probability-like score in (0, 1).
    pub fn score(&self, f: &Features) -> f64 {
        sigmoid(self.logit(f))
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TrainError {
    #[error("no sample has both a label-consistent and a label-inconsistent candidate")]
    NoTrainableSamples,
    #[error("invalid hyper-parameter: {0}")]
    InvalidParam(String),
}

/// Hinge on the score gap: `max(neg - pos + gamma, 0)`.
pub fn hinge(pos: f64, neg: f64, gamma: f64) -> f64 {
    (neg - pos + gamma).max(0.0)
}

/// Margin loss between the best-scored consistent and inconsistent
/// candidates. `None` if either side is empty.
pub fn margin_loss(m: &SelectorModel, pos: &[Features], neg: &[Features]) -> Option<f64> {
    let best = |zs: &[Features]| zs.iter().map(|f| m.score(f)).fold(None, |acc: Option<f64>, s| {
        Some(acc.map_or(s, |a| a.max(s)))
    });
    Some(hinge(best(pos)?, best(neg)?, m.gamma))
}

/// Split candidates by agreement with the label: (Z+, Z-).
pub fn filter_label_consistent(cs: &CandidateSet, label: bool) -> (Vec<&Candidate>, Vec<&Candidate>) {
    cs.candidates.iter().partition(|c| c.exec == label)
}

/// One statement's candidates, pre-featurized for training.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectorExample {
    pub label: bool,
    pub candidates: Vec<(Features, bool)>,
}

impl SelectorExample {
    pub fn new(ctx: &StatementContext, cs: &CandidateSet, label: bool) -> SelectorExample {
        SelectorExample {
            label,
            candidates: cs
                .candidates
                .iter()
                .map(|c| (featurize(ctx, &c.program), c.exec))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectorConfig {
    pub epochs: usize,
    pub lr: f64,
    pub gamma: f64,
    pub seed: u64,
}

impl Default for SelectorConfig {
    fn default() -> Self {
        SelectorConfig {
            epochs: 30,
            lr: 0.5,
            gamma: DEFAULT_GAMMA,
            seed: 0,
        }
    }
}

type Sparse = Vec<(usize, f64)>;

struct Interned {
    pos: Vec<Sparse>,
    neg: Vec<Sparse>,
}

fn best(w: &[f64], zs: &[Sparse]) -> (usize, f64) {
    let mut arg = 0;
    let mut top = f64::NEG_INFINITY;
    for (i, z) in zs.iter().enumerate() {
        let s = sigmoid(z.iter().map(|&(k, v)| w[k] * v).sum());
        if s > top {
            top = s;
            arg = i;
        }
    }
    (arg, top)
}

/// Subgradient descent on the margin loss, one sample at a time in a
/// seeded shuffled order. Samples lacking either Z+ or Z- are skipped.
/// Returns the model and the total loss after each epoch; training stops
/// early once the total loss reaches zero.
pub fn train_selector(
    data: &[SelectorExample],
    cfg: &SelectorConfig,
) -> Result<(SelectorModel, Vec<f64>), TrainError> {
    if !(cfg.lr > 0.0 && cfg.lr.is_finite()) {
        return Err(TrainError::InvalidParam(format!("lr must be positive, got {}", cfg.lr)));
    }
    if !(cfg.gamma > 0.0 && cfg.gamma.is_finite()) {
        return Err(TrainError::InvalidParam(format!("gamma must be positive, got {}", cfg.gamma)));
    }

    let mut vocab: BTreeMap<&str, usize> = BTreeMap::new();
    for ex in data {
        for (f, _) in &ex.candidates {
            for k in f.keys() {
                let n = vocab.len();
                vocab.entry(k.as_str()).or_insert(n);
            }
        }
    }
    let intern = |f: &Features| -> Sparse { f.iter().map(|(k, v)| (vocab[k.as_str()], *v)).collect() };
    let samples: Vec<Interned> = data
        .iter()
        .filter_map(|ex| {
            let (pos, neg): (Vec<_>, Vec<_>) = ex.candidates.iter().partition(|(_, e)| *e == ex.label);
            if pos.is_empty() || neg.is_empty() {
                return None;
            }
            Some(Interned {
                pos: pos.iter().map(|(f, _)| intern(f)).collect(),
                neg: neg.iter().map(|(f, _)| intern(f)).collect(),
            })
        })
        .collect();
    if samples.is_empty() {
        return Err(TrainError::NoTrainableSamples);
    }

    let mut w = vec![0.0; vocab.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut trace = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let ex = &samples[i];
            let (ip, sp) = best(&w, &ex.pos);
            let (in_, sn) = best(&w, &ex.neg);
            if hinge(sp, sn, cfg.gamma) > 0.0 {
                for &(k, v) in &ex.neg[in_] {
                    w[k] -= cfg.lr * sn * (1.0 - sn) * v;
                }
                for &(k, v) in &ex.pos[ip] {
                    w[k] += cfg.lr * sp * (1.0 - sp) * v;
                }
            }
        }
        let total: f64 = samples
            .iter()
            .map(|ex| hinge(best(&w, &ex.pos).1, best(&w, &ex.neg).1, cfg.gamma))
            .sum();
        trace.push(total);
        if total == 0.0 {
            break;
        }
    }

    let weights = vocab
        .into_iter()
        .map(|(k, i)| (k.to_string(), w[i]))
        .filter(|(_, v)| *v != 0.0)
        .collect();
    Ok((
        SelectorModel {
            gamma: cfg.gamma,
            weights,
        },
        trace,
    ))
}

/// Highest-scoring splittable candidate, restricted to those agreeing with
/// `label` when one is given. Ties go to the earlier candidate.
pub fn select_program(
    m: &SelectorModel,
    ctx: &StatementContext,
    label: Option<bool>,
    cs: &CandidateSet,
) -> Option<Program> {
    let mut chosen: Option<(&Program, f64)> = None;
    for c in &cs.candidates {
        if label.is_some_and(|l| c.exec != l) || !is_splittable(&c.program) {
            continue;
        }
        let s = m.score(&featurize(ctx, &c.program));
        if chosen.is_none_or(|(_, top)| s > top) {
            chosen = Some((&c.program, s));
        }
    }
    chosen.map(|(p, _)| p.clone())
}
