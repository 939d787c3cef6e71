//! CKY decoding of the best binary character tree from span scores.
//!
//! Because the tree score is a plain sum of independent span scores, the
//! maximization over a span's own label and its children's labels factors:
//! each span contributes its best label, and the chart only has to choose
//! split points. This gives `O(n^3 + n^2 L)` time. Ties go to the smallest
//! label id, then the smallest split point.

use std::rc::Rc;

use crate::chartransform::{ends_with_char_label, CharTree};
use crate::error::{Error, Result};
use crate::scoring::{span_index, LabelVocab, SpanScores};

/// Well-formedness masks applied before decoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecodeConfig {
    /// Only `@1`-final labels on length-1 spans, never on longer spans.
    pub constrain_char_labels: bool,
    /// Forbid the null label on the whole-sentence span.
    pub require_nonnull_root: bool,
}

impl Default for DecodeConfig {
    fn default() -> Self {
        DecodeConfig {
            constrain_char_labels: true,
            require_nonnull_root: true,
        }
    }
}

impl DecodeConfig {
    pub fn unconstrained() -> Self {
        DecodeConfig {
            constrain_char_labels: false,
            require_nonnull_root: false,
        }
    }
}

/// Sets forbidden `(span, label)` entries to negative infinity.
pub fn apply_masks(scores: &SpanScores, vocab: &LabelVocab, config: &DecodeConfig) -> Result<SpanScores> {
    if scores.num_labels() != vocab.len() {
        return Err(Error::Dimension(format!(
            "{} score columns for {} labels",
            scores.num_labels(),
            vocab.len()
        )));
    }
    let mut masked = scores.clone();
    let n = scores.n();
    if config.constrain_char_labels {
        let char_final: Vec<bool> = vocab.labels().iter().map(|l| ends_with_char_label(l)).collect();
        for i in 0..n {
            for j in i + 1..=n {
                let unit = j == i + 1;
                for (v, &is_char) in masked.span_mut(i, j).iter_mut().zip(&char_final) {
                    if is_char != unit {
                        *v = f64::NEG_INFINITY;
                    }
                }
            }
        }
    }
    if config.require_nonnull_root && n > 0 {
        masked.set(0, n, LabelVocab::NULL_ID, f64::NEG_INFINITY);
    }
    for (i, j) in masked.spans() {
        if !masked.span(i, j).iter().any(|v| v.is_finite()) {
            return Err(Error::Decode(format!("every label of span ({i}, {j}) is masked")));
        }
    }
    Ok(masked)
}

/// Best label per span, ties to the smallest id.
fn best_label(row: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (l, &v) in row.iter().enumerate() {
        if v > best.1 {
            best = (l, v);
        }
    }
    best
}

/// Filled CKY chart.
#[derive(Clone, Debug)]
pub struct Chart {
    n: usize,
    /// Best tree score of each span.
    pub best_combined: Vec<f64>,
    pub best_label: Vec<usize>,
    /// Split point of spans longer than one; 0 for unit spans.
    pub best_split: Vec<usize>,
}

impl Chart {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn combined(&self, i: usize, j: usize) -> f64 {
        self.best_combined[span_index(self.n, i, j)]
    }

    pub fn label(&self, i: usize, j: usize) -> usize {
        self.best_label[span_index(self.n, i, j)]
    }

    pub fn split(&self, i: usize, j: usize) -> usize {
        self.best_split[span_index(self.n, i, j)]
    }
}

/// Bottom-up pass over already-masked scores.
pub fn fill_chart(masked: &SpanScores) -> Chart {
    let n = masked.n();
    let count = n * (n + 1) / 2;
    let mut chart = Chart {
        n,
        best_combined: vec![0.0; count],
        best_label: vec![0; count],
        best_split: vec![0; count],
    };
    for len in 1..=n {
        for i in 0..=n - len {
            let j = i + len;
            let idx = span_index(n, i, j);
            let (label, own) = best_label(masked.span(i, j));
            chart.best_label[idx] = label;
            if len == 1 {
                chart.best_combined[idx] = own;
                continue;
            }
            let mut best_k = i + 1;
            let mut best = f64::NEG_INFINITY;
            for k in i + 1..j {
                let v = chart.best_combined[span_index(n, i, k)] + chart.best_combined[span_index(n, k, j)];
                if v > best {
                    best = v;
                    best_k = k;
                }
            }
            chart.best_split[idx] = best_k;
            chart.best_combined[idx] = own + best;
        }
    }
    chart
}

fn backtrace(chart: &Chart, vocab: &LabelVocab, chars: &[char], i: usize, j: usize) -> CharTree {
    let label = vocab.label(chart.label(i, j)).to_string();
    if j == i + 1 {
        return CharTree::leaf(label, i, chars[i]);
    }
    let k = chart.split(i, j);
    CharTree::binary(
        label,
        backtrace(chart, vocab, chars, i, k),
        backtrace(chart, vocab, chars, k, j),
    )
}

fn check_inputs(scores: &SpanScores, chars: &[char]) -> Result<()> {
    if scores.n() == 0 {
        return Err(Error::Decode("empty sentence".into()));
    }
    if chars.len() != scores.n() {
        return Err(Error::Mismatch(format!(
            "{} characters for scores over n={}",
            chars.len(),
            scores.n()
        )));
    }
    Ok(())
}

/// Highest-scoring binary tree over `chars` and its total score, the sum of
/// the chosen span scores accumulated as `s(node) + (left + right)`.
pub fn cky_decode(
    scores: &SpanScores,
    vocab: &LabelVocab,
    chars: &[char],
    config: &DecodeConfig,
) -> Result<(CharTree, f64)> {
    check_inputs(scores, chars)?;
    let masked = apply_masks(scores, vocab, config)?;
    let chart = fill_chart(&masked);
    let n = scores.n();
    let total = chart.combined(0, n);
    if !total.is_finite() {
        return Err(Error::Decode("all root labels masked".into()));
    }
    Ok((backtrace(&chart, vocab, chars, 0, n), total))
}

/// Unlabeled binary bracketing.
#[derive(Debug)]
enum Bracketing {
    Unit,
    Split(usize, Rc<Bracketing>, Rc<Bracketing>),
}

/// Largest sentence [`brute_force_decode`] accepts.
pub const BRUTE_FORCE_MAX_LEN: usize = 12;

/// Every binary bracketing of `(i, j)`, ordered by split point and then
/// recursively by the left and right sub-bracketings.
fn enumerate(i: usize, j: usize, n: usize, memo: &mut Vec<Option<Rc<Vec<Rc<Bracketing>>>>>) -> Rc<Vec<Rc<Bracketing>>> {
    let idx = span_index(n, i, j);
    if let Some(v) = &memo[idx] {
        return v.clone();
    }
    let mut out = Vec::new();
    if j == i + 1 {
        out.push(Rc::new(Bracketing::Unit));
    } else {
        for k in i + 1..j {
            let lefts = enumerate(i, k, n, memo);
            let rights = enumerate(k, j, n, memo);
            for l in lefts.iter() {
                for r in rights.iter() {
                    out.push(Rc::new(Bracketing::Split(k, l.clone(), r.clone())));
                }
            }
        }
    }
    let out = Rc::new(out);
    memo[idx] = Some(out.clone());
    out
}

/// Number of binary bracketings of a length-`n` sentence, by enumeration.
pub fn bracketing_count(n: usize) -> Result<usize> {
    if n == 0 || n > BRUTE_FORCE_MAX_LEN {
        return Err(Error::Decode(format!("brute force supports 1..={BRUTE_FORCE_MAX_LEN} characters, got {n}")));
    }
    let mut memo = vec![None; n * (n + 1) / 2];
    Ok(enumerate(0, n, n, &mut memo).len())
}

/// Exhaustive reference decoder: scores every bracketing with per-span
/// argmax labels and keeps the first maximum in enumeration order.
pub fn brute_force_decode(
    scores: &SpanScores,
    vocab: &LabelVocab,
    chars: &[char],
    config: &DecodeConfig,
) -> Result<(CharTree, f64)> {
    check_inputs(scores, chars)?;
    let n = scores.n();
    if n > BRUTE_FORCE_MAX_LEN {
        return Err(Error::Decode(format!("brute force limited to {BRUTE_FORCE_MAX_LEN} characters, got {n}")));
    }
    let masked = apply_masks(scores, vocab, config)?;

    let label_of = |i: usize, j: usize| -> (usize, f64) {
        let row = masked.span(i, j);
        let mut best = 0;
        for l in 1..row.len() {
            if row[l] > row[best] {
                best = l;
            }
        }
        (best, row[best])
    };
    fn score(b: &Bracketing, i: usize, j: usize, label_of: &dyn Fn(usize, usize) -> (usize, f64)) -> f64 {
        let own = label_of(i, j).1;
        match b {
            Bracketing::Unit => own,
            Bracketing::Split(k, l, r) => own + (score(l, i, *k, label_of) + score(r, *k, j, label_of)),
        }
    }
    fn build(
        b: &Bracketing,
        i: usize,
        j: usize,
        label_of: &dyn Fn(usize, usize) -> (usize, f64),
        vocab: &LabelVocab,
        chars: &[char],
    ) -> CharTree {
        let label = vocab.label(label_of(i, j).0).to_string();
        match b {
            Bracketing::Unit => CharTree::leaf(label, i, chars[i]),
            Bracketing::Split(k, l, r) => CharTree::binary(
                label,
                build(l, i, *k, label_of, vocab, chars),
                build(r, *k, j, label_of, vocab, chars),
            ),
        }
    }

    let mut memo = vec![None; n * (n + 1) / 2];
    let all = enumerate(0, n, n, &mut memo);
    let mut best: Option<(&Rc<Bracketing>, f64)> = None;
    for b in all.iter() {
        let s = score(b, 0, n, &label_of);
        if best.is_none_or(|(_, v)| s > v) {
            best = Some((b, s));
        }
    }
    let (b, s) = best.expect("at least one bracketing");
    if !s.is_finite() {
        return Err(Error::Decode("all root labels masked".into()));
    }
    Ok((build(b, 0, n, &label_of, vocab, chars), s))
}
