//! Training objectives on span scores: per-span cross-entropy ("label
//! loss") and the structured hinge over decoded trees ("tree loss").

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::chartransform::{gold_span_labels, CharTree, GoldSpanMap};
use crate::decoder::{cky_decode, DecodeConfig};
use crate::error::{Error, Result};
use crate::scoring::{tree_score, LabelVocab, SpanScores};

/// Loss value and its gradient with respect to span scores, keyed by
/// `(i, j, label)`. Zero entries are omitted.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LossValue {
    pub value: f64,
    pub gradient: BTreeMap<(usize, usize, usize), f64>,
}

/// Which spans the label loss sums over.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelLossSpans {
    /// Every span; spans outside the gold tree target the null label.
    #[default]
    All,
    /// Only the spans of the gold tree.
    Gold,
}

/// Margin used by the tree loss.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MarginMode {
    /// A constant 1 whenever the predicted tree differs from gold.
    #[default]
    Flat,
    /// Loss-augmented decoding with `1 / |gold spans|` per wrong
    /// `(span, label)` pair.
    Hamming,
}

impl std::str::FromStr for MarginMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "flat" => Ok(MarginMode::Flat),
            "hamming" => Ok(MarginMode::Hamming),
            _ => Err(Error::Config(format!("unknown margin mode {s:?}"))),
        }
    }
}

fn log_softmax_parts(row: &[f64]) -> (f64, Vec<f64>) {
    let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = row.iter().map(|v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    let lse = max + sum.ln();
    (lse, exps.into_iter().map(|e| e / sum).collect())
}

/// Summed cross-entropy between each span's softmax and its gold label.
pub fn label_loss(
    scores: &SpanScores,
    gold: &GoldSpanMap,
    vocab: &LabelVocab,
    spans: LabelLossSpans,
) -> Result<LossValue> {
    if gold.n != scores.n() {
        return Err(Error::Mismatch(format!("gold n={} vs scores n={}", gold.n, scores.n())));
    }
    for label in gold.entries.values() {
        vocab.require(label)?;
    }
    let mut loss = LossValue::default();
    let mut add_span = |i: usize, j: usize, target: usize| {
        let row = scores.span(i, j);
        let (lse, probs) = log_softmax_parts(row);
        loss.value += lse - row[target];
        for (l, p) in probs.into_iter().enumerate() {
            let g = if l == target { p - 1.0 } else { p };
            if g != 0.0 {
                loss.gradient.insert((i, j, l), g);
            }
        }
    };
    match spans {
        LabelLossSpans::All => {
            for (i, j) in scores.spans() {
                add_span(i, j, vocab.require(gold.label(i, j))?);
            }
        }
        LabelLossSpans::Gold => {
            for (&(i, j), label) in &gold.entries {
                add_span(i, j, vocab.require(label)?);
            }
        }
    }
    Ok(loss)
}

fn pairs(tree: &CharTree, vocab: &LabelVocab) -> Result<Vec<(usize, usize, usize)>> {
    tree.labeled_spans()
        .into_iter()
        .map(|(i, j, l)| Ok((i, j, vocab.require(l)?)))
        .collect()
}

/// Result of [`tree_loss_with_prediction`].
#[derive(Clone, Debug)]
pub struct TreeLoss {
    pub loss: LossValue,
    pub predicted: CharTree,
}

/// Structured hinge `max(0, s(pred) + margin(pred) - s(gold))`.
pub fn tree_loss(
    scores: &SpanScores,
    gold_tree: &CharTree,
    vocab: &LabelVocab,
    config: &DecodeConfig,
    margin_mode: MarginMode,
) -> Result<LossValue> {
    Ok(tree_loss_with_prediction(scores, gold_tree, vocab, config, margin_mode)?.loss)
}

/// [`tree_loss`] that also returns the tree the decoder predicted.
pub fn tree_loss_with_prediction(
    scores: &SpanScores,
    gold_tree: &CharTree,
    vocab: &LabelVocab,
    config: &DecodeConfig,
    margin_mode: MarginMode,
) -> Result<TreeLoss> {
    if gold_tree.len() != scores.n() {
        return Err(Error::Mismatch(format!(
            "gold tree covers {} characters, scores n={}",
            gold_tree.len(),
            scores.n()
        )));
    }
    let chars = gold_tree.chars();
    let gold = gold_span_labels(gold_tree)?;
    let gold_pairs = pairs(gold_tree, vocab)?;
    let is_gold = |i: usize, j: usize, l: usize| gold.label(i, j) == vocab.label(l);

    let (predicted, margin) = match margin_mode {
        MarginMode::Flat => {
            let (pred, _) = cky_decode(scores, vocab, &chars, config)?;
            let margin = if pred == *gold_tree { 0.0 } else { 1.0 };
            (pred, margin)
        }
        MarginMode::Hamming => {
            let m = 1.0 / gold_pairs.len() as f64;
            let mut augmented = scores.clone();
            for (i, j) in scores.spans() {
                for (l, v) in augmented.span_mut(i, j).iter_mut().enumerate() {
                    if !is_gold(i, j, l) {
                        *v += m;
                    }
                }
            }
            let (pred, _) = cky_decode(&augmented, vocab, &chars, config)?;
            let wrong = pairs(&pred, vocab)?
                .into_iter()
                .filter(|&(i, j, l)| !is_gold(i, j, l))
                .count();
            (pred, m * wrong as f64)
        }
    };

    let mut loss = LossValue::default();
    if predicted != *gold_tree {
        let value = tree_score(&predicted, scores, vocab)? + margin - tree_score(gold_tree, scores, vocab)?;
        if value > 0.0 {
            loss.value = value;
            for key in pairs(&predicted, vocab)? {
                *loss.gradient.entry(key).or_insert(0.0) += 1.0;
            }
            for key in gold_pairs {
                *loss.gradient.entry(key).or_insert(0.0) -= 1.0;
            }
            loss.gradient.retain(|_, g| *g != 0.0);
        }
    }
    Ok(TreeLoss { loss, predicted })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chartransform::to_char_tree;
    use crate::decoder::brute_force_decode;
    use crate::scoring::{build_vocab, oracle_scores};
    use crate::treebank::parse_tree;

    fn gold() -> CharTree {
        to_char_tree(&parse_tree("(TOP (IP (NN ab) (VV c)))").unwrap()).unwrap()
    }

    #[test]
    fn uniform_scores_give_log_l_per_span() {
        let g = gold();
        let v = build_vocab([&g]).unwrap();
        let s = SpanScores::zeros(3, v.len());
        let loss = label_loss(&s, &gold_span_labels(&g).unwrap(), &v, LabelLossSpans::All).unwrap();
        let expected = 6.0 * (v.len() as f64).ln();
        assert!((loss.value - expected).abs() < 1e-12);
        let gold_only = label_loss(&s, &gold_span_labels(&g).unwrap(), &v, LabelLossSpans::Gold).unwrap();
        assert!((gold_only.value - 5.0 * (v.len() as f64).ln()).abs() < 1e-12);
    }

    #[test]
    fn label_loss_vanishes_as_gold_margin_grows() {
        let g = gold();
        let v = build_vocab([&g]).unwrap();
        let gm = gold_span_labels(&g).unwrap();
        let mut previous = f64::INFINITY;
        for m in [0.0, 1.0, 2.0, 5.0, 10.0, 20.0, 40.0] {
            let mut s = SpanScores::zeros(3, v.len());
            for (i, j) in s.clone().spans() {
                let target = v.require(gm.label(i, j)).unwrap();
                s.set(i, j, target, m);
            }
            let loss = label_loss(&s, &gm, &v, LabelLossSpans::All).unwrap().value;
            assert!(loss < previous);
            previous = loss;
        }
        assert!(previous < 1e-12);
    }

    #[test]
    fn unknown_gold_label() {
        let g = gold();
        let v = LabelVocab::from_labels(vec!["∅".into(), "@1".into(), "@2".into()]).unwrap();
        let s = SpanScores::zeros(3, 3);
        assert!(label_loss(&s, &gold_span_labels(&g).unwrap(), &v, LabelLossSpans::All).is_err());
    }

    #[test]
    fn oracle_scores_give_zero_tree_loss() {
        let g = gold();
        let v = build_vocab([&g]).unwrap();
        let s = oracle_scores(&gold_span_labels(&g).unwrap(), &v).unwrap();
        for mode in [MarginMode::Flat, MarginMode::Hamming] {
            let loss = tree_loss(&s, &g, &v, &DecodeConfig::default(), mode).unwrap();
            assert_eq!(loss.value, 0.0);
            assert!(loss.gradient.is_empty());
        }
    }

    #[test]
    fn zero_scores_flat_margin_is_one() {
        let g = gold();
        let v = build_vocab([&g]).unwrap();
        let s = SpanScores::zeros(3, v.len());
        let cfg = DecodeConfig::default();
        let (bf, _) = brute_force_decode(&s, &v, &g.chars(), &cfg).unwrap();
        assert_ne!(bf, g);
        let loss = tree_loss(&s, &g, &v, &cfg, MarginMode::Flat).unwrap();
        assert_eq!(loss.value, 1.0);
        // shared (span, label) pairs cancel
        for (i, j, l) in g.labeled_spans() {
            let id = v.id(l).unwrap();
            let in_pred = bf.labeled_spans().contains(&(i, j, l));
            assert_eq!(loss.gradient.contains_key(&(i, j, id)), !in_pred);
        }
    }

    #[test]
    fn length_mismatch() {
        let g = gold();
        let v = build_vocab([&g]).unwrap();
        let s = SpanScores::zeros(4, v.len());
        assert!(tree_loss(&s, &g, &v, &DecodeConfig::default(), MarginMode::Flat).is_err());
    }

    #[test]
    fn margin_mode_parses() {
        assert_eq!("flat".parse::<MarginMode>().unwrap(), MarginMode::Flat);
        assert_eq!("hamming".parse::<MarginMode>().unwrap(), MarginMode::Hamming);
        assert!("other".parse::<MarginMode>().is_err());
    }
}
