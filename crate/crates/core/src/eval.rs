//! Segmentation F1 and labeled-bracket parse F1.
//!
//! Constituents are `(label, start, end)` triples in character offsets, so
//! parse scores stay defined when the predicted segmentation differs from
//! gold. The root is excluded when labeled `TOP`, pre-terminals are always
//! excluded, and punctuation is kept.

use std::collections::HashMap;
use std::fmt;

use crate::chartransform::{segmentation_of, WordSegmentation};
use crate::error::{Error, Result};
use crate::treebank::{SyntaxTree, TOP_LABEL};

/// Precision, recall and F1 with the counts behind them.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub matched: usize,
    pub gold_count: usize,
    pub pred_count: usize,
}

impl Prf {
    pub fn from_counts(matched: usize, gold_count: usize, pred_count: usize) -> Self {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(matched, pred_count);
        let recall = ratio(matched, gold_count);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Prf {
            precision,
            recall,
            f1,
            matched,
            gold_count,
            pred_count,
        }
    }
}

/// Micro-averaged exact-span word F1.
pub fn seg_f1(gold: &[WordSegmentation], pred: &[WordSegmentation]) -> Result<Prf> {
    if gold.len() != pred.len() {
        return Err(Error::Mismatch(format!("{} gold vs {} predicted sentences", gold.len(), pred.len())));
    }
    let (mut matched, mut gold_count, mut pred_count) = (0, 0, 0);
    for (k, (g, p)) in gold.iter().zip(pred).enumerate() {
        if g.char_len() != p.char_len() {
            return Err(Error::Mismatch(format!(
                "sentence {k}: {} gold vs {} predicted characters",
                g.char_len(),
                p.char_len()
            )));
        }
        // both span lists are sorted and non-overlapping
        let (mut a, mut b) = (0, 0);
        while a < g.spans.len() && b < p.spans.len() {
            match g.spans[a].cmp(&p.spans[b]) {
                std::cmp::Ordering::Equal => {
                    matched += 1;
                    a += 1;
                    b += 1;
                }
                std::cmp::Ordering::Less => a += 1,
                std::cmp::Ordering::Greater => b += 1,
            }
        }
        gold_count += g.spans.len();
        pred_count += p.spans.len();
    }
    Ok(Prf::from_counts(matched, gold_count, pred_count))
}

/// Scored constituents of a tree as `(label, start, end)` with multiplicity.
pub fn constituents(tree: &SyntaxTree) -> HashMap<(String, usize, usize), usize> {
    fn walk(
        tree: &SyntaxTree,
        start: usize,
        is_root: bool,
        out: &mut HashMap<(String, usize, usize), usize>,
    ) -> usize {
        match tree {
            SyntaxTree::Leaf(token) => token.chars().count(),
            SyntaxTree::Node { label, children } => {
                let mut end = start;
                for child in children {
                    end += walk(child, end, false, out);
                }
                let skip = tree.is_preterminal() || (is_root && label == TOP_LABEL);
                if !skip {
                    *out.entry((label.clone(), start, end)).or_insert(0) += 1;
                }
                end - start
            }
        }
    }
    let mut out = HashMap::new();
    walk(tree, 0, true, &mut out);
    out
}

/// Micro-averaged labeled-bracket F1.
pub fn parse_f1(gold_trees: &[SyntaxTree], pred_trees: &[SyntaxTree]) -> Result<Prf> {
    if gold_trees.len() != pred_trees.len() {
        return Err(Error::Mismatch(format!(
            "{} gold vs {} predicted trees",
            gold_trees.len(),
            pred_trees.len()
        )));
    }
    let (mut matched, mut gold_count, mut pred_count) = (0, 0, 0);
    for (k, (g, p)) in gold_trees.iter().zip(pred_trees).enumerate() {
        if g.chars() != p.chars() {
            return Err(Error::Mismatch(format!("sentence {k}: character yields differ")));
        }
        let gc = constituents(g);
        let pc = constituents(p);
        matched += gc
            .iter()
            .map(|(key, &c)| c.min(pc.get(key).copied().unwrap_or(0)))
            .sum::<usize>();
        gold_count += gc.values().sum::<usize>();
        pred_count += pc.values().sum::<usize>();
    }
    Ok(Prf::from_counts(matched, gold_count, pred_count))
}

/// Both metrics of a joint evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JointReport {
    pub sentences: usize,
    pub seg: Prf,
    pub parse: Prf,
}

pub fn joint_report(gold: &[SyntaxTree], pred: &[SyntaxTree]) -> Result<JointReport> {
    let parse = parse_f1(gold, pred)?;
    let gs: Vec<_> = gold.iter().map(segmentation_of).collect();
    let ps: Vec<_> = pred.iter().map(segmentation_of).collect();
    let seg = seg_f1(&gs, &ps)?;
    Ok(JointReport {
        sentences: gold.len(),
        seg,
        parse,
    })
}

impl JointReport {
    /// Stable `key=value` lines.
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| out.push_str(&format!("{k}={v}\n"));
        kv("sentences", self.sentences.to_string());
        for (prefix, m) in [("seg", &self.seg), ("par", &self.parse)] {
            kv(&format!("{prefix}_precision"), format!("{:?}", m.precision));
            kv(&format!("{prefix}_recall"), format!("{:?}", m.recall));
            kv(&format!("{prefix}_f1"), format!("{:?}", m.f1));
            kv(&format!("{prefix}_matched"), m.matched.to_string());
            kv(&format!("{prefix}_gold"), m.gold_count.to_string());
            kv(&format!("{prefix}_pred"), m.pred_count.to_string());
        }
        out
    }

    /// One-line summary, e.g. `seg_f1=1.0 par_f1=1.0`.
    pub fn summary(&self) -> String {
        format!("seg_f1={:?} par_f1={:?}", self.seg.f1, self.parse.f1)
    }
}

impl fmt::Display for JointReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<8} {:>9} {:>9} {:>9} {:>8} {:>8} {:>8}", "", "P", "R", "F1", "match", "gold", "pred")?;
        for (name, m) in [("Seg", &self.seg), ("Par", &self.parse)] {
            writeln!(
                f,
                "{:<8} {:>9.2} {:>9.2} {:>9.2} {:>8} {:>8} {:>8}",
                name,
                100.0 * m.precision,
                100.0 * m.recall,
                100.0 * m.f1,
                m.matched,
                m.gold_count,
                m.pred_count
            )?;
        }
        write!(f, "sentences: {}", self.sentences)
    }
}
