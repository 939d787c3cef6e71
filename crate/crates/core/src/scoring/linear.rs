use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::SpanRepresentation;

/// Linear scorer over hashed features: `bias + sum of active rows`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearScorer {
    dim: usize,
    num_labels: usize,
    weights: BTreeMap<u32, Vec<f64>>,
    bias: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearGrad {
    pub weights: BTreeMap<u32, Vec<f64>>,
    pub bias: Vec<f64>,
}

impl LinearGrad {
    pub fn zeros(num_labels: usize) -> Self {
        LinearGrad {
            weights: BTreeMap::new(),
            bias: vec![0.0; num_labels],
        }
    }

    pub(crate) fn accumulate(&mut self, rep: &SpanRepresentation, upstream: &[f64]) {
        for (g, u) in self.bias.iter_mut().zip(upstream) {
            *g += u;
        }
        for &id in &rep.ids {
            let row = self
                .weights
                .entry(id)
                .or_insert_with(|| vec![0.0; upstream.len()]);
            for (g, u) in row.iter_mut().zip(upstream) {
                *g += u;
            }
        }
    }
}

impl LinearScorer {
    /// Zero-initialized scorer.
    pub fn new(dim: usize, num_labels: usize) -> Self {
        LinearScorer {
            dim,
            num_labels,
            weights: BTreeMap::new(),
            bias: vec![0.0; num_labels],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_labels(&self) -> usize {
        self.num_labels
    }

    pub fn forward(&self, rep: &SpanRepresentation) -> Vec<f64> {
        let mut out = self.bias.clone();
        for id in &rep.ids {
            if let Some(row) = self.weights.get(id) {
                for (o, w) in out.iter_mut().zip(row) {
                    *o += w;
                }
            }
        }
        out
    }

    pub(crate) fn apply(&mut self, grad: &LinearGrad, lr: f64) {
        for (id, g) in &grad.weights {
            let row = self
                .weights
                .entry(*id)
                .or_insert_with(|| vec![0.0; g.len()]);
            for (w, d) in row.iter_mut().zip(g) {
                *w -= lr * d;
            }
        }
        for (w, d) in self.bias.iter_mut().zip(&grad.bias) {
            *w -= lr * d;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_moves_scores_against_gradient() {
        let mut s = LinearScorer::new(16, 2);
        let rep = SpanRepresentation {
            ids: vec![3, 4],
            dim: 16,
        };
        let mut g = LinearGrad::zeros(2);
        g.accumulate(&rep, &[1.0, -1.0]);
        s.apply(&g, 0.5);
        // bias and two rows each move by 0.5
        assert_eq!(s.forward(&rep), vec![-1.5, 1.5]);
    }
}
