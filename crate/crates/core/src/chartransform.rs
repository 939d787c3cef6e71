//! Conversion between word-level treebank trees and binarized
//! character-level trees.
//!
//! The forward direction expands every word into characters pre-terminated
//! by `@1`, merges unary chains into `+`-joined labels and left-binarizes
//! the result. Intermediate nodes created inside a word are labeled `@2`;
//! those created at phrase level carry the null label `∅`.
//!
//! The inverse direction is total: it accepts any binary character tree
//! (including decoder output that places `@1`/`@2` oddly) and always
//! returns a word tree plus a segmentation covering the whole sentence.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::treebank::{SyntaxTree, TOP_LABEL};

/// Pre-terminal of a single character.
pub const CHAR_LABEL: &str = "@1";
/// Intermediate node inside a word of three or more characters.
pub const SUBWORD_LABEL: &str = "@2";
/// Null label for phrase-level intermediates and non-constituent spans.
pub const NULL_LABEL: &str = "∅";
/// ASCII spelling of [`NULL_LABEL`] in files.
pub const NULL_TOKEN: &str = "NULL";
/// Pre-terminal inserted over recovered words that lack one.
pub const FALLBACK_POS: &str = "X";
/// Separator of merged unary chains.
pub const MERGE_SEP: char = '+';

/// True if the final `+`-segment of `label` is `@1`.
pub fn ends_with_char_label(label: &str) -> bool {
    label.rsplit(MERGE_SEP).next() == Some(CHAR_LABEL)
}

fn is_null_segment(segment: &str) -> bool {
    segment == NULL_LABEL || segment == NULL_TOKEN
}

/// Maps the on-disk spelling of a label to its in-memory form.
pub fn label_from_file(label: &str) -> String {
    label
        .split(MERGE_SEP)
        .map(|s| if s == NULL_TOKEN { NULL_LABEL } else { s })
        .collect::<Vec<_>>()
        .join("+")
}

/// Maps a label to its ASCII-safe on-disk spelling.
pub fn label_to_file(label: &str) -> String {
    label
        .split(MERGE_SEP)
        .map(|s| if s == NULL_LABEL { NULL_TOKEN } else { s })
        .collect::<Vec<_>>()
        .join("+")
}

/// A strictly binary character-level tree. Every node covers a span
/// `(i, j)` of character offsets; leaves cover exactly one character.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CharTree {
    pub label: String,
    pub span: (usize, usize),
    pub kind: CharNode,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum CharNode {
    Leaf(char),
    Binary(Box<CharTree>, Box<CharTree>),
}

impl CharTree {
    pub fn leaf(label: impl Into<String>, position: usize, ch: char) -> Self {
        CharTree {
            label: label.into(),
            span: (position, position + 1),
            kind: CharNode::Leaf(ch),
        }
    }

    /// Joins two adjacent subtrees.
    ///
    /// Panics if `left` does not end where `right` begins.
    pub fn binary(label: impl Into<String>, left: CharTree, right: CharTree) -> Self {
        assert_eq!(left.span.1, right.span.0, "children of a binary node must be adjacent");
        CharTree {
            label: label.into(),
            span: (left.span.0, right.span.1),
            kind: CharNode::Binary(Box::new(left), Box::new(right)),
        }
    }

    pub fn len(&self) -> usize {
        self.span.1 - self.span.0
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self.kind, CharNode::Leaf(_))
    }

    pub fn children(&self) -> Option<(&CharTree, &CharTree)> {
        match &self.kind {
            CharNode::Leaf(_) => None,
            CharNode::Binary(l, r) => Some((l, r)),
        }
    }

    /// Characters of the fringe.
    pub fn chars(&self) -> Vec<char> {
        let mut out = Vec::with_capacity(self.len());
        self.visit(&mut |node| {
            if let CharNode::Leaf(c) = node.kind {
                out.push(c);
            }
        });
        out
    }

    /// Pre-order traversal.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a CharTree)) {
        f(self);
        if let CharNode::Binary(l, r) = &self.kind {
            l.visit(f);
            r.visit(f);
        }
    }

    /// `(i, j, label)` of every node in pre-order.
    pub fn labeled_spans(&self) -> Vec<(usize, usize, &str)> {
        let mut out = Vec::with_capacity(2 * self.len());
        self.visit(&mut |node| out.push((node.span.0, node.span.1, node.label.as_str())));
        out
    }

    pub fn node_count(&self) -> usize {
        match &self.kind {
            CharNode::Leaf(_) => 1,
            CharNode::Binary(l, r) => 1 + l.node_count() + r.node_count(),
        }
    }

    /// Checks the span-partition invariant.
    pub fn validate_spans(&self) -> Result<()> {
        match &self.kind {
            CharNode::Leaf(_) if self.span.1 == self.span.0 + 1 => Ok(()),
            CharNode::Leaf(_) => Err(Error::InvalidTree(format!("leaf with span {:?}", self.span))),
            CharNode::Binary(l, r) => {
                let (i, j) = self.span;
                let k = l.span.1;
                if l.span.0 != i || r.span.0 != k || r.span.1 != j || !(i < k && k < j) {
                    return Err(Error::InvalidTree(format!(
                        "children {:?} {:?} do not partition {:?}",
                        l.span, r.span, self.span
                    )));
                }
                l.validate_spans()?;
                r.validate_spans()
            }
        }
    }

    /// Bracketed form with `∅` spelled `NULL`.
    pub fn to_syntax_tree(&self) -> SyntaxTree {
        let label = label_to_file(&self.label);
        match &self.kind {
            CharNode::Leaf(c) => SyntaxTree::node(label, vec![SyntaxTree::Leaf(c.to_string())]),
            CharNode::Binary(l, r) => SyntaxTree::node(label, vec![l.to_syntax_tree(), r.to_syntax_tree()]),
        }
    }

    /// Reads a character tree back from its bracketed form.
    pub fn from_syntax_tree(tree: &SyntaxTree) -> Result<Self> {
        fn build(tree: &SyntaxTree, start: usize) -> Result<CharTree> {
            let SyntaxTree::Node { label, children } = tree else {
                return Err(Error::InvalidTree("bare token where a labeled node was expected".into()));
            };
            let label = label_from_file(label);
            match children.as_slice() {
                [SyntaxTree::Leaf(token)] => {
                    let mut chars = token.chars();
                    match (chars.next(), chars.next()) {
                        (Some(c), None) => Ok(CharTree::leaf(label, start, c)),
                        _ => Err(Error::InvalidTree(format!(
                            "character leaf {token:?} must be exactly one character"
                        ))),
                    }
                }
                [l @ SyntaxTree::Node { .. }, r @ SyntaxTree::Node { .. }] => {
                    let left = build(l, start)?;
                    let right = build(r, left.span.1)?;
                    Ok(CharTree::binary(label, left, right))
                }
                _ => Err(Error::InvalidTree(format!(
                    "node {label} is neither a character leaf nor binary"
                ))),
            }
        }
        build(tree, 0)
    }
}

impl fmt::Display for CharTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.to_syntax_tree().fmt(f)
    }
}

/// Word boundaries of one sentence as character offsets.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct WordSegmentation {
    pub spans: Vec<(usize, usize)>,
    pub words: Vec<String>,
}

impl WordSegmentation {
    pub fn from_words<S: AsRef<str>>(words: &[S]) -> Self {
        let mut seg = WordSegmentation::default();
        for w in words {
            seg.push(w.as_ref());
        }
        seg
    }

    fn push(&mut self, word: &str) {
        let start = self.spans.last().map_or(0, |s| s.1);
        self.spans.push((start, start + word.chars().count()));
        self.words.push(word.to_string());
    }

    /// Sentence length in characters.
    pub fn char_len(&self) -> usize {
        self.spans.last().map_or(0, |s| s.1)
    }

    /// Words joined by single spaces.
    pub fn to_line(&self) -> String {
        self.words.join(" ")
    }
}

/// Gold label of every span of a character tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoldSpanMap {
    pub n: usize,
    pub entries: BTreeMap<(usize, usize), String>,
}

impl GoldSpanMap {
    /// Gold label of `(i, j)`; spans outside the tree are null.
    pub fn label(&self, i: usize, j: usize) -> &str {
        self.entries.get(&(i, j)).map_or(NULL_LABEL, String::as_str)
    }
}

/// Word offsets of a word-level tree.
pub fn segmentation_of(word_tree: &SyntaxTree) -> WordSegmentation {
    WordSegmentation::from_words(&word_tree.fringe())
}

/// Intermediate n-ary form shared by both directions.
#[derive(Debug)]
enum Work {
    Node { label: String, children: Vec<Work> },
    Char(char),
}

fn check_source_label(label: &str) -> Result<()> {
    if label.contains(MERGE_SEP) {
        return Err(Error::Transform(format!("label {label:?} contains the merge separator '+'")));
    }
    if matches!(label, CHAR_LABEL | SUBWORD_LABEL | NULL_LABEL | NULL_TOKEN) {
        return Err(Error::Transform(format!("label {label:?} is reserved")));
    }
    Ok(())
}

/// Character expansion: each word under its pre-terminal becomes a run of
/// `@1` nodes.
fn expand(tree: &SyntaxTree) -> Result<Work> {
    let SyntaxTree::Node { label, children } = tree else {
        return Err(Error::Transform("word not under a pre-terminal".into()));
    };
    check_source_label(label)?;
    if children.is_empty() {
        return Err(Error::Transform(format!("node {label} has no children")));
    }
    if let [SyntaxTree::Leaf(word)] = children.as_slice() {
        if word.is_empty() {
            return Err(Error::Transform(format!("empty word under {label}")));
        }
        let chars = word
            .chars()
            .map(|c| Work::Node {
                label: CHAR_LABEL.to_string(),
                children: vec![Work::Char(c)],
            })
            .collect();
        return Ok(Work::Node {
            label: label.clone(),
            children: chars,
        });
    }
    if children.iter().any(SyntaxTree::is_leaf) {
        return Err(Error::Transform(format!(
            "word under {label} is not the only child of a pre-terminal"
        )));
    }
    Ok(Work::Node {
        label: label.clone(),
        children: children.iter().map(expand).collect::<Result<_>>()?,
    })
}

/// Collapses unary chains and left-binarizes. `pos` tracks the character
/// offset of the next leaf.
fn binarize(mut node: Work, pos: &mut usize) -> CharTree {
    let mut labels = Vec::new();
    let children = loop {
        match node {
            Work::Node { label, mut children } => {
                labels.push(label);
                if children.len() == 1 && matches!(children[0], Work::Node { .. }) {
                    node = children.pop().unwrap();
                } else {
                    break children;
                }
            }
            Work::Char(_) => unreachable!("characters only occur under @1"),
        }
    };
    let label = labels.join("+");

    if let [Work::Char(c)] = children.as_slice() {
        let leaf = CharTree::leaf(label, *pos, *c);
        *pos += 1;
        return leaf;
    }

    let parts: Vec<CharTree> = children.into_iter().map(|c| binarize(c, pos)).collect();
    let inside_word = parts.iter().all(|p| p.is_leaf() && p.label == CHAR_LABEL);
    let intermediate = if inside_word { SUBWORD_LABEL } else { NULL_LABEL };

    let last = parts.len() - 1;
    let mut iter = parts.into_iter();
    let mut acc = iter.next().unwrap();
    for (k, part) in iter.enumerate() {
        let l = if k + 1 == last { label.as_str() } else { intermediate };
        acc = CharTree::binary(l, acc, part);
    }
    acc
}

/// Word-level tree to binarized character-level tree.
pub fn to_char_tree(word_tree: &SyntaxTree) -> Result<CharTree> {
    word_tree
        .validate()
        .map_err(|e| Error::Transform(e.to_string()))?;
    let expanded = expand(word_tree)?;
    let mut pos = 0;
    Ok(binarize(expanded, &mut pos))
}

fn unmerge(tree: &CharTree) -> Vec<Work> {
    let inner = match &tree.kind {
        CharNode::Leaf(c) => vec![Work::Char(*c)],
        CharNode::Binary(l, r) => {
            let mut v = unmerge(l);
            v.extend(unmerge(r));
            v
        }
    };
    // Build the chain bottom-up; spliced labels contribute no node.
    let mut children = inner;
    for segment in tree.label.split(MERGE_SEP).rev() {
        if segment.is_empty() || is_null_segment(segment) || segment == SUBWORD_LABEL {
            continue;
        }
        if segment == CHAR_LABEL && !matches!(children.as_slice(), [Work::Char(_)]) {
            continue;
        }
        children = vec![Work::Node {
            label: segment.to_string(),
            children,
        }];
    }
    children
}

fn is_char_marker(w: &Work) -> Option<char> {
    match w {
        Work::Node { label, children } if label == CHAR_LABEL => match children.as_slice() {
            [Work::Char(c)] => Some(*c),
            _ => None,
        },
        _ => None,
    }
}

enum Item {
    Word(String),
    Tree(SyntaxTree),
}

/// Groups `@1` runs into words and rebuilds the word-level tree.
fn recover(children: Vec<Work>, seg: &mut WordSegmentation) -> Vec<Item> {
    let mut items = Vec::new();
    let mut run = String::new();
    for child in children {
        if let Some(c) = is_char_marker(&child) {
            run.push(c);
            continue;
        }
        if !run.is_empty() {
            seg.push(&run);
            items.push(Item::Word(std::mem::take(&mut run)));
        }
        match child {
            Work::Char(c) => {
                let w = c.to_string();
                seg.push(&w);
                items.push(Item::Word(w));
            }
            Work::Node { label, children } => {
                let inner = recover(children, seg);
                items.push(Item::Tree(attach(label, inner)));
            }
        }
    }
    if !run.is_empty() {
        seg.push(&run);
        items.push(Item::Word(run));
    }
    items
}

fn attach(label: String, mut items: Vec<Item>) -> SyntaxTree {
    if items.len() == 1 {
        if let Item::Word(w) = &mut items[0] {
            return SyntaxTree::node(label, vec![SyntaxTree::Leaf(std::mem::take(w))]);
        }
    }
    SyntaxTree::node(label, items.into_iter().map(wrap_item).collect())
}

fn wrap_item(item: Item) -> SyntaxTree {
    match item {
        Item::Word(w) => SyntaxTree::node(FALLBACK_POS, vec![SyntaxTree::Leaf(w)]),
        Item::Tree(t) => t,
    }
}

/// Binarized character-level tree back to a word-level tree and its
/// segmentation. Never fails: malformed `@1`/`@2` placement is repaired by
/// treating stray characters as single-character words and inserting `X`
/// pre-terminals where a word has none.
pub fn from_char_tree(char_tree: &CharTree) -> (SyntaxTree, WordSegmentation) {
    let mut seg = WordSegmentation::default();
    let top = unmerge(char_tree);
    let mut items = recover(top, &mut seg);
    let tree = if items.len() == 1 && matches!(items[0], Item::Tree(_)) {
        match items.pop() {
            Some(Item::Tree(t)) => t,
            _ => unreachable!(),
        }
    } else {
        SyntaxTree::node(TOP_LABEL, items.into_iter().map(wrap_item).collect())
    };
    (tree, seg)
}

/// Supervision targets: the label of every node keyed by its span.
pub fn gold_span_labels(char_tree: &CharTree) -> Result<GoldSpanMap> {
    let mut entries = BTreeMap::new();
    for (i, j, label) in char_tree.labeled_spans() {
        if entries.insert((i, j), label.to_string()).is_some() {
            return Err(Error::Internal(format!("duplicate span ({i}, {j})")));
        }
    }
    Ok(GoldSpanMap {
        n: char_tree.len(),
        entries,
    })
}
