//! Two-layer rectifier MLP over hashed span features.
//!
//! The first layer is a `dim x hidden` matrix applied to a multi-hot input,
//! so only the rows of active features matter. Rows are stored sparsely and
//! materialized on first update; an untouched row equals its deterministic
//! initial value derived from `init_seed` and the feature id.

use std::borrow::Cow;
use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::SpanRepresentation;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlpHead {
    dim: usize,
    hidden: usize,
    num_labels: usize,
    dropout: f64,
    init_seed: u64,
    init_scale: f64,
    w1: BTreeMap<u32, Vec<f64>>,
    b1: Vec<f64>,
    /// `hidden x num_labels`, row-major.
    w2: Vec<f64>,
    b2: Vec<f64>,
}

/// Activations kept from the forward pass.
#[derive(Clone, Debug)]
pub struct MlpCache {
    pre: Vec<f64>,
    mask: Option<Vec<f64>>,
}

impl MlpCache {
    fn activation(&self, h: usize) -> f64 {
        let a = self.pre[h].max(0.0);
        match &self.mask {
            Some(m) => a * m[h],
            None => a,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MlpGrad {
    pub w1: BTreeMap<u32, Vec<f64>>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

impl MlpGrad {
    pub fn zeros(head: &MlpHead) -> Self {
        MlpGrad {
            w1: BTreeMap::new(),
            b1: vec![0.0; head.hidden],
            w2: vec![0.0; head.hidden * head.num_labels],
            b2: vec![0.0; head.num_labels],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.b1.iter().chain(&self.w2).chain(&self.b2).all(|&g| g == 0.0)
            && self.w1.values().flatten().all(|&g| g == 0.0)
    }
}

fn mix(seed: u64, id: u32) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ (id as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl MlpHead {
    /// Randomly initialized head. First-layer rows are uniform in
    /// `[-0.1, 0.1]`, the output layer uniform in `[-1/sqrt(H), 1/sqrt(H)]`.
    pub fn new(dim: usize, hidden: usize, num_labels: usize, dropout: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bound = 1.0 / (hidden as f64).sqrt();
        let w2 = (0..hidden * num_labels)
            .map(|_| rng.gen_range(-bound..bound))
            .collect();
        MlpHead {
            dim,
            hidden,
            num_labels,
            dropout,
            init_seed: seed,
            init_scale: 0.1,
            w1: BTreeMap::new(),
            b1: vec![0.0; hidden],
            w2,
            b2: vec![0.0; num_labels],
        }
    }

    /// All parameters zero.
    pub fn zeros(dim: usize, hidden: usize, num_labels: usize) -> Self {
        MlpHead {
            dim,
            hidden,
            num_labels,
            dropout: 0.0,
            init_seed: 0,
            init_scale: 0.0,
            w1: BTreeMap::new(),
            b1: vec![0.0; hidden],
            w2: vec![0.0; hidden * num_labels],
            b2: vec![0.0; num_labels],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn num_labels(&self) -> usize {
        self.num_labels
    }

    pub fn dropout(&self) -> f64 {
        self.dropout
    }

    fn initial_row(&self, id: u32) -> Vec<f64> {
        if self.init_scale == 0.0 {
            return vec![0.0; self.hidden];
        }
        let mut rng = ChaCha8Rng::seed_from_u64(mix(self.init_seed, id));
        (0..self.hidden)
            .map(|_| rng.gen_range(-self.init_scale..self.init_scale))
            .collect()
    }

    /// First-layer row of feature `id`.
    pub fn row(&self, id: u32) -> Cow<'_, [f64]> {
        match self.w1.get(&id) {
            Some(r) => Cow::Borrowed(r),
            None => Cow::Owned(self.initial_row(id)),
        }
    }

    /// Mutable first-layer row, materialized if needed.
    pub fn row_mut(&mut self, id: u32) -> &mut Vec<f64> {
        if !self.w1.contains_key(&id) {
            let r = self.initial_row(id);
            self.w1.insert(id, r);
        }
        self.w1.get_mut(&id).unwrap()
    }

    pub fn b1(&self) -> &[f64] {
        &self.b1
    }

    pub fn w2(&self) -> &[f64] {
        &self.w2
    }

    pub fn b2(&self) -> &[f64] {
        &self.b2
    }

    pub fn b1_mut(&mut self) -> &mut [f64] {
        &mut self.b1
    }

    pub fn w2_mut(&mut self) -> &mut [f64] {
        &mut self.w2
    }

    pub fn b2_mut(&mut self) -> &mut [f64] {
        &mut self.b2
    }

    /// Output scores only, no dropout.
    pub fn forward(&self, rep: &SpanRepresentation) -> Vec<f64> {
        self.forward_cached(rep, None).0
    }

    pub fn forward_cached(
        &self,
        rep: &SpanRepresentation,
        rng: Option<&mut ChaCha8Rng>,
    ) -> (Vec<f64>, MlpCache) {
        let mut pre = self.b1.clone();
        for &id in &rep.ids {
            for (p, w) in pre.iter_mut().zip(self.row(id).iter()) {
                *p += w;
            }
        }
        let mask = match rng {
            Some(rng) if self.dropout > 0.0 => {
                let keep = 1.0 - self.dropout;
                Some(
                    (0..self.hidden)
                        .map(|_| if rng.gen::<f64>() < keep { 1.0 / keep } else { 0.0 })
                        .collect(),
                )
            }
            _ => None,
        };
        let cache = MlpCache { pre, mask };
        let mut out = self.b2.clone();
        for h in 0..self.hidden {
            let a = cache.activation(h);
            if a != 0.0 {
                let row = &self.w2[h * self.num_labels..(h + 1) * self.num_labels];
                for (o, w) in out.iter_mut().zip(row) {
                    *o += a * w;
                }
            }
        }
        (out, cache)
    }

    pub(crate) fn backward_into(
        &self,
        rep: &SpanRepresentation,
        cache: &MlpCache,
        upstream: &[f64],
        grad: &mut MlpGrad,
    ) {
        let l = self.num_labels;
        for (g, u) in grad.b2.iter_mut().zip(upstream) {
            *g += u;
        }
        let mut dpre = vec![0.0; self.hidden];
        for h in 0..self.hidden {
            let a = cache.activation(h);
            let row = &self.w2[h * l..(h + 1) * l];
            let grow = &mut grad.w2[h * l..(h + 1) * l];
            let mut dact = 0.0;
            for k in 0..l {
                grow[k] += a * upstream[k];
                dact += row[k] * upstream[k];
            }
            if cache.pre[h] > 0.0 {
                dpre[h] = dact * cache.mask.as_ref().map_or(1.0, |m| m[h]);
            }
        }
        for (g, d) in grad.b1.iter_mut().zip(&dpre) {
            *g += d;
        }
        for &id in &rep.ids {
            let row = grad.w1.entry(id).or_insert_with(|| vec![0.0; self.hidden]);
            for (g, d) in row.iter_mut().zip(&dpre) {
                *g += d;
            }
        }
    }

    pub(crate) fn apply(&mut self, grad: &MlpGrad, lr: f64) {
        for (id, g) in &grad.w1 {
            let row = self.row_mut(*id);
            for (w, d) in row.iter_mut().zip(g) {
                *w -= lr * d;
            }
        }
        for (w, d) in self.b1.iter_mut().zip(&grad.b1) {
            *w -= lr * d;
        }
        for (w, d) in self.w2.iter_mut().zip(&grad.w2) {
            *w -= lr * d;
        }
        for (w, d) in self.b2.iter_mut().zip(&grad.b2) {
            *w -= lr * d;
        }
    }
}

/// Exact gradients of the (dropout-free) forward map contracted with
/// `upstream`.
pub fn mlp_backward(head: &MlpHead, rep: &SpanRepresentation, upstream: &[f64]) -> Result<MlpGrad> {
    if upstream.len() != head.num_labels || rep.dim != head.dim {
        return Err(Error::Dimension(format!(
            "head expects dim {} and {} outputs, got dim {} and {} upstream values",
            head.dim,
            head.num_labels,
            rep.dim,
            upstream.len()
        )));
    }
    if let Some(v) = upstream.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("upstream gradient {v}")));
    }
    let (_, cache) = head.forward_cached(rep, None);
    let mut grad = MlpGrad::zeros(head);
    head.backward_into(rep, &cache, upstream, &mut grad);
    Ok(grad)
}
