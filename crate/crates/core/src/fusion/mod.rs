//! Gated-attention fusion of statement/table and evidence embeddings.
//!
//! `a_i = σ(h_ST · h_i)`, `h_evd = Σ a_i h_i`, `p = σ(W·[h_evd ⊕ h_ST] + b)`.

mod train;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::solve::Evidence;
use crate::table::Table;

pub use train::{init_model, loss, loss_and_gradients, train_fusion, FusionConfig, Gradients};

/// Encoder table size.
pub const HASH_BUCKETS: u64 = 1 << 17;
pub const DEFAULT_DIM: usize = 64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FusionError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Shape { expected: usize, found: usize },
    #[error("no evidence embeddings")]
    EmptyEvidence,
    #[error("no training data")]
    EmptyData,
    #[error("invalid hyper-parameter: {0}")]
    InvalidParam(String),
}

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Hashed unigram and bigram indices of `text` (with repeats) and the
/// 1/sqrt(word count) scale applied to their sum.
#[derive(Debug, Clone, PartialEq)]
pub struct Bag {
    pub indices: Vec<u32>,
    pub scale: f64,
}

impl Bag {
    pub fn new(text: &str) -> Bag {
        let words: Vec<&str> = text.split_whitespace().collect();
        if words.is_empty() {
            return Bag {
                indices: Vec::new(),
                scale: 0.0,
            };
        }
        let hash = |s: &str| (fnv1a64(s.as_bytes()) % HASH_BUCKETS) as u32;
        let mut indices: Vec<u32> = words.iter().map(|w| hash(w)).collect();
        indices.extend(words.windows(2).map(|w| hash(&format!("{} {}", w[0], w[1]))));
        Bag {
            indices,
            scale: 1.0 / (words.len() as f64).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionModel {
    pub d: usize,
    pub b: f64,
    /// `[W_evd ; W_ST]`, length `2d`.
    #[serde(rename = "W")]
    pub w: Vec<f64>,
    /// Rows absent from the map are zero.
    pub encoder: BTreeMap<u32, Vec<f64>>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl FusionModel {
    pub fn zeros(d: usize) -> FusionModel {
        FusionModel {
            d,
            b: 0.0,
            w: vec![0.0; 2 * d],
            encoder: BTreeMap::new(),
        }
    }

    pub fn embed(&self, bag: &Bag) -> Vec<f64> {
        let mut h = vec![0.0; self.d];
        for i in &bag.indices {
            if let Some(row) = self.encoder.get(i) {
                for (x, r) in h.iter_mut().zip(row) {
                    *x += r;
                }
            }
        }
        for x in &mut h {
            *x *= bag.scale;
        }
        h
    }

    pub fn w_evd(&self) -> &[f64] {
        &self.w[..self.d]
    }

    pub fn w_st(&self) -> &[f64] {
        &self.w[self.d..]
    }

    /// Check that parameter shapes agree with `d`.
    pub fn validate(&self) -> Result<(), FusionError> {
        if self.w.len() != 2 * self.d {
            return Err(FusionError::Shape {
                expected: 2 * self.d,
                found: self.w.len(),
            });
        }
        for row in self.encoder.values() {
            if row.len() != self.d {
                return Err(FusionError::Shape {
                    expected: self.d,
                    found: row.len(),
                });
            }
        }
        Ok(())
    }
}

pub fn encode_text(m: &FusionModel, text: &str) -> Vec<f64> {
    m.embed(&Bag::new(text))
}

/// Gates `σ(h_ST · h_i)` and the gated sum of evidence embeddings.
pub fn attention_fuse(h_st: &[f64], evidence: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<f64>), FusionError> {
    if evidence.is_empty() {
        return Err(FusionError::EmptyEvidence);
    }
    let d = h_st.len();
    let mut h_evd = vec![0.0; d];
    let mut gates = Vec::with_capacity(evidence.len());
    for h in evidence {
        if h.len() != d {
            return Err(FusionError::Shape {
                expected: d,
                found: h.len(),
            });
        }
        let a = sigmoid(dot(h_st, h));
        for (x, v) in h_evd.iter_mut().zip(h) {
            *x += a * v;
        }
        gates.push(a);
    }
    Ok((h_evd, gates))
}

/// Encoded statement/table text and evidence pair texts.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionInput {
    pub st: Bag,
    pub evidence: Vec<Bag>,
}

impl FusionInput {
    pub fn new(statement: &str, t: &Table, e: &Evidence) -> FusionInput {
        let mut evidence: Vec<Bag> = e.items.iter().map(|i| Bag::new(&i.pair_text())).collect();
        if evidence.is_empty() {
            evidence = Evidence::placeholder().items.iter().map(|i| Bag::new(&i.pair_text())).collect();
        }
        FusionInput {
            st: Bag::new(&format!("{statement} {}", t.linearize())),
            evidence,
        }
    }
}

/// Logit `W·[h_evd ⊕ h_ST] + b`.
pub fn logit(m: &FusionModel, x: &FusionInput) -> f64 {
    let h_st = m.embed(&x.st);
    let hs: Vec<Vec<f64>> = x.evidence.iter().map(|b| m.embed(b)).collect();
    let h_evd = match attention_fuse(&h_st, &hs) {
        Ok((h, _)) => h,
        Err(_) => vec![0.0; m.d],
    };
    dot(m.w_evd(), &h_evd) + dot(m.w_st(), &h_st) + m.b
}

pub fn predict_input(m: &FusionModel, x: &FusionInput) -> f64 {
    sigmoid(logit(m, x))
}

/// Entailment probability; above 0.5 means entailed.
pub fn predict(m: &FusionModel, statement: &str, t: &Table, e: &Evidence) -> f64 {
    predict_input(m, &FusionInput::new(statement, t, e))
}
