//! Joint Chinese word segmentation and constituency parsing over
//! character-level span scores.
//!
//! Word-level treebank trees are turned into binarized character trees in
//! which every character is pre-terminated by `@1` and word-internal
//! binarization nodes are labeled `@2` ([`chartransform`]). A scorer assigns
//! every span a score per label ([`scoring`]), CKY finds the best binary
//! tree ([`decoder`]), and the inverse transform recovers words and the
//! n-ary phrase structure. [`losses`] and [`trainer`] fit the in-repo
//! scorers; [`eval`] computes segmentation and labeled-bracket F1.

pub mod bench;
pub mod chartransform;
pub mod decoder;
pub mod error;
pub mod eval;
pub mod losses;
pub mod parse;
pub mod scoring;
pub mod synthetic;
pub mod trainer;
pub mod treebank;

pub use chartransform::{
    from_char_tree, gold_span_labels, segmentation_of, to_char_tree, CharTree, GoldSpanMap, WordSegmentation,
};
pub use decoder::{apply_masks, brute_force_decode, cky_decode, DecodeConfig};
pub use error::{Error, Result};
pub use eval::{joint_report, parse_f1, seg_f1, JointReport, Prf};
pub use losses::{label_loss, tree_loss, LabelLossSpans, LossValue, MarginMode};
pub use scoring::{build_vocab, oracle_scores, score_spans, LabelVocab, Scorer, SpanScores};
pub use trainer::{evaluate_dev, train, Checkpoint, TrainConfig};
pub use treebank::{parse_bracketed, serialize_bracketed, strip_function_tags, Corpus, SyntaxTree};
