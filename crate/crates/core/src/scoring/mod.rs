//! Span scores: the label vocabulary, the dense per-sentence score tensor,
//! and the scorers that fill it.

mod features;
mod linear;
mod mlp;
mod scorefile;

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chartransform::{CharTree, GoldSpanMap, CHAR_LABEL, NULL_LABEL, SUBWORD_LABEL};
use crate::error::{Error, Result};

pub use features::{length_bucket, span_representation, SpanRepresentation, DEFAULT_DIM, HASH_SEED};
pub use linear::{LinearGrad, LinearScorer};
pub use mlp::{mlp_backward, MlpCache, MlpGrad, MlpHead};
pub use scorefile::{read_score_file, read_scores, write_scores, ScoreBlock};

/// Bidirectional map between merged labels and ids. The null label is
/// always id 0.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct LabelVocab {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

impl LabelVocab {
    pub const NULL_ID: usize = 0;

    /// Builds a vocabulary from an explicit label list, which must start
    /// with the null label, be free of duplicates, and contain `@1` and
    /// `@2`.
    pub fn from_labels(labels: Vec<String>) -> Result<Self> {
        if labels.first().map(String::as_str) != Some(NULL_LABEL) {
            return Err(Error::UnknownLabel(format!(
                "vocabulary must start with {NULL_LABEL}"
            )));
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (id, label) in labels.iter().enumerate() {
            if index.insert(label.clone(), id).is_some() {
                return Err(Error::UnknownLabel(format!("duplicate label {label}")));
            }
        }
        for required in [CHAR_LABEL, SUBWORD_LABEL] {
            if !index.contains_key(required) {
                return Err(Error::UnknownLabel(format!("vocabulary lacks {required}")));
            }
        }
        Ok(LabelVocab { labels, index })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn id(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn require(&self, label: &str) -> Result<usize> {
        self.id(label).ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn label(&self, id: usize) -> &str {
        &self.labels[id]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

impl TryFrom<Vec<String>> for LabelVocab {
    type Error = Error;

    fn try_from(labels: Vec<String>) -> Result<Self> {
        LabelVocab::from_labels(labels)
    }
}

impl From<LabelVocab> for Vec<String> {
    fn from(v: LabelVocab) -> Self {
        v.labels
    }
}

/// `∅` followed by every merged label in order of first appearance.
pub fn build_vocab<'a>(trees: impl IntoIterator<Item = &'a CharTree>) -> Result<LabelVocab> {
    let mut labels = vec![NULL_LABEL.to_string()];
    let mut seen: HashMap<String, ()> = HashMap::new();
    seen.insert(NULL_LABEL.to_string(), ());
    let mut any = false;
    for tree in trees {
        any = true;
        for (_, _, label) in tree.labeled_spans() {
            if !seen.contains_key(label) {
                seen.insert(label.to_string(), ());
                labels.push(label.to_string());
            }
        }
    }
    if !any {
        return Err(Error::EmptyCorpus);
    }
    for required in [CHAR_LABEL, SUBWORD_LABEL] {
        if !seen.contains_key(required) {
            labels.push(required.to_string());
        }
    }
    LabelVocab::from_labels(labels)
}

/// Position of span `(i, j)` in lexicographic order among all spans of a
/// sentence of length `n`.
#[inline]
pub fn span_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j <= n);
    i * (2 * n - i + 1) / 2 + (j - i - 1)
}

pub fn span_count(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Dense scores of every label for every span `(i, j)`, `0 <= i < j <= n`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpanScores {
    n: usize,
    num_labels: usize,
    values: Vec<f64>,
}

impl SpanScores {
    pub fn zeros(n: usize, num_labels: usize) -> Self {
        SpanScores {
            n,
            num_labels,
            values: vec![0.0; span_count(n) * num_labels],
        }
    }

    /// Wraps a flat array laid out span-major in lexicographic span order.
    pub fn from_values(n: usize, num_labels: usize, values: Vec<f64>) -> Result<Self> {
        let expected = span_count(n) * num_labels;
        if values.len() != expected {
            return Err(Error::Dimension(format!(
                "expected {expected} values for n={n}, L={num_labels}, found {}",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("span score {v}")));
        }
        Ok(SpanScores {
            n,
            num_labels,
            values,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_labels(&self) -> usize {
        self.num_labels
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn span(&self, i: usize, j: usize) -> &[f64] {
        let start = span_index(self.n, i, j) * self.num_labels;
        &self.values[start..start + self.num_labels]
    }

    #[inline]
    pub fn span_mut(&mut self, i: usize, j: usize) -> &mut [f64] {
        let start = span_index(self.n, i, j) * self.num_labels;
        &mut self.values[start..start + self.num_labels]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, label: usize) -> f64 {
        self.span(i, j)[label]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, label: usize, value: f64) {
        self.span_mut(i, j)[label] = value;
    }

    /// All spans in lexicographic order.
    pub fn spans(&self) -> impl Iterator<Item = (usize, usize)> {
        let n = self.n;
        (0..n).flat_map(move |i| (i + 1..=n).map(move |j| (i, j)))
    }
}

/// Sum of span scores over a tree's labeled spans, accumulated bottom-up as
/// `s(node) + (left + right)`.
pub fn tree_score(tree: &CharTree, scores: &SpanScores, vocab: &LabelVocab) -> Result<f64> {
    let (i, j) = tree.span;
    let own = scores.get(i, j, vocab.require(&tree.label)?);
    Ok(match tree.children() {
        None => own,
        Some((l, r)) => own + (tree_score(l, scores, vocab)? + tree_score(r, scores, vocab)?),
    })
}

/// 1.0 at every gold `(span, label)` pair and 0.0 elsewhere.
pub fn oracle_scores(gold: &GoldSpanMap, vocab: &LabelVocab) -> Result<SpanScores> {
    let mut scores = SpanScores::zeros(gold.n, vocab.len());
    for (&(i, j), label) in &gold.entries {
        scores.set(i, j, vocab.require(label)?, 1.0);
    }
    Ok(scores)
}

/// An in-repo span scorer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scorer {
    Linear(LinearScorer),
    Mlp(MlpHead),
}

/// Parameter gradient matching a [`Scorer`] variant.
#[derive(Clone, Debug)]
pub enum ScorerGrad {
    Linear(LinearGrad),
    Mlp(MlpGrad),
}

/// Cached forward activations of one span, needed for backpropagation.
#[derive(Clone, Debug)]
pub enum ForwardCache {
    Linear,
    Mlp(MlpCache),
}

impl Scorer {
    pub fn dim(&self) -> usize {
        match self {
            Scorer::Linear(s) => s.dim(),
            Scorer::Mlp(s) => s.dim(),
        }
    }

    pub fn num_labels(&self) -> usize {
        match self {
            Scorer::Linear(s) => s.num_labels(),
            Scorer::Mlp(s) => s.num_labels(),
        }
    }

    pub fn zero_grad(&self) -> ScorerGrad {
        match self {
            Scorer::Linear(s) => ScorerGrad::Linear(LinearGrad::zeros(s.num_labels())),
            Scorer::Mlp(s) => ScorerGrad::Mlp(MlpGrad::zeros(s)),
        }
    }

    /// Scores one span. Dropout is applied only when `rng` is given.
    pub fn forward(
        &self,
        rep: &SpanRepresentation,
        rng: Option<&mut ChaCha8Rng>,
    ) -> (Vec<f64>, ForwardCache) {
        match self {
            Scorer::Linear(s) => (s.forward(rep), ForwardCache::Linear),
            Scorer::Mlp(s) => {
                let (out, cache) = s.forward_cached(rep, rng);
                (out, ForwardCache::Mlp(cache))
            }
        }
    }

    /// Accumulates parameter gradients for one span into `grad`.
    pub fn backward(
        &self,
        rep: &SpanRepresentation,
        cache: &ForwardCache,
        upstream: &[f64],
        grad: &mut ScorerGrad,
    ) {
        match (self, cache, grad) {
            (Scorer::Linear(_), _, ScorerGrad::Linear(g)) => g.accumulate(rep, upstream),
            (Scorer::Mlp(s), ForwardCache::Mlp(c), ScorerGrad::Mlp(g)) => {
                s.backward_into(rep, c, upstream, g)
            }
            _ => panic!("gradient does not match scorer kind"),
        }
    }

    /// Plain gradient step: `param -= lr * grad`.
    pub fn apply(&mut self, grad: &ScorerGrad, lr: f64) {
        match (self, grad) {
            (Scorer::Linear(s), ScorerGrad::Linear(g)) => s.apply(g, lr),
            (Scorer::Mlp(s), ScorerGrad::Mlp(g)) => s.apply(g, lr),
            _ => panic!("gradient does not match scorer kind"),
        }
    }

    fn check(&self, vocab: &LabelVocab) -> Result<()> {
        if self.num_labels() != vocab.len() {
            return Err(Error::Dimension(format!(
                "scorer has {} outputs, vocabulary has {} labels",
                self.num_labels(),
                vocab.len()
            )));
        }
        Ok(())
    }
}

/// Scores every span of `chars`. With `dropout_seed` set the scorer runs in
/// training mode with dropout drawn from that seed; otherwise it is
/// deterministic.
pub fn score_spans(
    scorer: &Scorer,
    chars: &[char],
    vocab: &LabelVocab,
    dropout_seed: Option<u64>,
) -> Result<SpanScores> {
    scorer.check(vocab)?;
    let n = chars.len();
    let mut rng = dropout_seed.map(ChaCha8Rng::seed_from_u64);
    let mut scores = SpanScores::zeros(n, vocab.len());
    for i in 0..n {
        for j in i + 1..=n {
            let rep = span_representation(chars, i, j, scorer.dim())?;
            let (out, _) = scorer.forward(&rep, rng.as_mut());
            scores.span_mut(i, j).copy_from_slice(&out);
        }
    }
    Ok(scores)
}
