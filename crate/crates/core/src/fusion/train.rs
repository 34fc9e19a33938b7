use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{dot, sigmoid, FusionError, FusionInput, FusionModel};

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub w: Vec<f64>,
    pub b: f64,
    pub encoder: BTreeMap<u32, Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FusionConfig {
    pub d: usize,
    pub lr: f64,
    pub epochs: usize,
    pub batch: usize,
    pub seed: u64,
    /// Standard deviation of initial encoder rows.
    pub init_scale: f64,
}

impl Default for FusionConfig {
    fn default() -> Self {
        FusionConfig {
            d: super::DEFAULT_DIM,
            lr: 0.05,
            epochs: 30,
            batch: 16,
            seed: 0,
            init_scale: 0.1,
        }
    }
}

/// Encoder rows for every index seen in `inputs`, each drawn from
/// N(0, scale²) with a generator keyed by `seed` and the index, so models
/// built from different inputs agree on the rows they share. `W` and `b`
/// start at zero.
pub fn init_model<'a>(
    d: usize,
    inputs: impl Iterator<Item = &'a FusionInput>,
    seed: u64,
    scale: f64,
) -> FusionModel {
    let mut seen = BTreeSet::new();
    for x in inputs {
        seen.extend(x.st.indices.iter().copied());
        for e in &x.evidence {
            seen.extend(e.indices.iter().copied());
        }
    }
    let normal = Normal::new(0.0, scale).expect("finite scale");
    let mut m = FusionModel::zeros(d);
    for i in seen {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ u64::from(i).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        m.encoder.insert(i, (0..d).map(|_| normal.sample(&mut rng)).collect());
    }
    m
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Binary cross-entropy `-[y ln p + (1-y) ln(1-p)]` from the logit.
fn bce(z: f64, y: bool) -> f64 {
    softplus(z) - if y { z } else { 0.0 }
}

/// Mean binary cross-entropy over the batch.
pub fn loss(m: &FusionModel, batch: &[(FusionInput, bool)]) -> f64 {
    if batch.is_empty() {
        return 0.0;
    }
    batch.iter().map(|(x, y)| bce(super::logit(m, x), *y)).sum::<f64>() / batch.len() as f64
}

fn add_row(grads: &mut BTreeMap<u32, Vec<f64>>, bag: &super::Bag, g: &[f64], coef: f64) {
    for i in &bag.indices {
        let row = grads.entry(*i).or_insert_with(|| vec![0.0; g.len()]);
        for (r, v) in row.iter_mut().zip(g) {
            *r += coef * bag.scale * v;
        }
    }
}

/// Mean loss and its exact gradient with respect to `W`, `b`, and every
/// encoder row the batch touches.
pub fn loss_and_gradients(m: &FusionModel, batch: &[(FusionInput, bool)]) -> (f64, Gradients) {
    let d = m.d;
    let mut g = Gradients {
        w: vec![0.0; 2 * d],
        b: 0.0,
        encoder: BTreeMap::new(),
    };
    if batch.is_empty() {
        return (0.0, g);
    }
    let n = batch.len() as f64;
    let (w_e, w_s) = (m.w_evd(), m.w_st());
    let mut total = 0.0;
    for (x, y) in batch {
        let h_st = m.embed(&x.st);
        let hs: Vec<Vec<f64>> = x.evidence.iter().map(|b| m.embed(b)).collect();
        let gates: Vec<f64> = hs.iter().map(|h| sigmoid(dot(&h_st, h))).collect();
        let mut h_evd = vec![0.0; d];
        for (a, h) in gates.iter().zip(&hs) {
            for (e, v) in h_evd.iter_mut().zip(h) {
                *e += a * v;
            }
        }
        let z = dot(w_e, &h_evd) + dot(w_s, &h_st) + m.b;
        total += bce(z, *y);
        let dz = (sigmoid(z) - if *y { 1.0 } else { 0.0 }) / n;

        for k in 0..d {
            g.w[k] += dz * h_evd[k];
            g.w[d + k] += dz * h_st[k];
        }
        g.b += dz;

        // dz/dh_ST = W_s + Σ (W_e·h_i) a_i (1-a_i) h_i
        // dz/dh_i  = a_i W_e + (W_e·h_i) a_i (1-a_i) h_ST
        let mut d_st = w_s.to_vec();
        for ((a, h), bag) in gates.iter().zip(&hs).zip(&x.evidence) {
            let c = dot(w_e, h) * a * (1.0 - a);
            for k in 0..d {
                d_st[k] += c * h[k];
            }
            let d_h: Vec<f64> = (0..d).map(|k| a * w_e[k] + c * h_st[k]).collect();
            add_row(&mut g.encoder, bag, &d_h, dz);
        }
        add_row(&mut g.encoder, &x.st, &d_st, dz);
    }
    (total / n, g)
}

fn apply(m: &mut FusionModel, g: &Gradients, lr: f64) {
    for (w, gw) in m.w.iter_mut().zip(&g.w) {
        *w -= lr * gw;
    }
    m.b -= lr * g.b;
    for (i, gr) in &g.encoder {
        let row = m.encoder.entry(*i).or_insert_with(|| vec![0.0; gr.len()]);
        for (r, v) in row.iter_mut().zip(gr) {
            *r -= lr * v;
        }
    }
}

/// Mini-batch gradient descent with a seeded shuffle each epoch. Returns the
/// trained model and the mean training loss after each epoch.
pub fn train_fusion(
    mut m: FusionModel,
    data: &[(FusionInput, bool)],
    cfg: &FusionConfig,
) -> Result<(FusionModel, Vec<f64>), FusionError> {
    if data.is_empty() {
        return Err(FusionError::EmptyData);
    }
    if !(cfg.lr > 0.0 && cfg.lr.is_finite()) {
        return Err(FusionError::InvalidParam(format!("lr must be positive, got {}", cfg.lr)));
    }
    if cfg.batch == 0 {
        return Err(FusionError::InvalidParam("batch must be at least 1".into()));
    }
    m.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut trace = Vec::with_capacity(cfg.epochs);
    let mut batch = Vec::with_capacity(cfg.batch);
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(cfg.batch) {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| data[i].clone()));
            let (_, g) = loss_and_gradients(&m, &batch);
            apply(&mut m, &g, cfg.lr);
        }
        trace.push(loss(&m, data));
    }
    Ok((m, trace))
}
