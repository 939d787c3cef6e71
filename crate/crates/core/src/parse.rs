//! End-to-end parsing of raw character sequences: score, decode, and
//! convert back to word-level trees.

use rayon::prelude::*;

use crate::chartransform::{from_char_tree, CharTree, WordSegmentation};
use crate::decoder::{cky_decode, DecodeConfig};
use crate::error::Result;
use crate::scoring::{score_spans, LabelVocab, Scorer, SpanScores};
use crate::treebank::SyntaxTree;

#[derive(Clone, Debug, PartialEq)]
pub struct Parsed {
    pub char_tree: CharTree,
    pub score: f64,
    pub tree: SyntaxTree,
    pub segmentation: WordSegmentation,
}

/// Characters of a raw input line, whitespace removed.
pub fn sentence_chars(line: &str) -> Vec<char> {
    line.chars().filter(|c| !c.is_whitespace()).collect()
}

/// Decodes precomputed scores.
pub fn parse_scores(scores: &SpanScores, vocab: &LabelVocab, chars: &[char], config: &DecodeConfig) -> Result<Parsed> {
    let (char_tree, score) = cky_decode(scores, vocab, chars, config)?;
    let (tree, segmentation) = from_char_tree(&char_tree);
    Ok(Parsed {
        char_tree,
        score,
        tree,
        segmentation,
    })
}

/// Scores with `scorer` and decodes.
pub fn parse_chars(scorer: &Scorer, vocab: &LabelVocab, chars: &[char], config: &DecodeConfig) -> Result<Parsed> {
    let scores = score_spans(scorer, chars, vocab, None)?;
    parse_scores(&scores, vocab, chars, config)
}

/// Parses many sentences on the current rayon pool; output order follows
/// input order.
pub fn parse_all(
    scorer: &Scorer,
    vocab: &LabelVocab,
    sentences: &[Vec<char>],
    config: &DecodeConfig,
) -> Result<Vec<Parsed>> {
    sentences
        .par_iter()
        .map(|chars| parse_chars(scorer, vocab, chars, config))
        .collect()
}
