//! Reading and writing bracketed (PTB/CTB-style) constituency trees.
//!
//! Trees are s-expressions: `(LABEL child ...)` where each child is either a
//! nested tree or a bare token. An unlabeled outer pair, as produced by the
//! CTB distribution (`( (IP ...))`), is normalized to a root labeled `TOP`.
//! Input may spread a tree over several lines; output is always one tree per
//! line.

use std::fmt;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Label given to an unlabeled outer bracket.
pub const TOP_LABEL: &str = "TOP";

/// An n-ary labeled tree over word (or character) leaves.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SyntaxTree {
    Leaf(String),
    Node {
        label: String,
        children: Vec<SyntaxTree>,
    },
}

impl SyntaxTree {
    pub fn leaf(token: impl Into<String>) -> Self {
        SyntaxTree::Leaf(token.into())
    }

    pub fn node(label: impl Into<String>, children: Vec<SyntaxTree>) -> Self {
        SyntaxTree::Node {
            label: label.into(),
            children,
        }
    }

    /// Label of an internal node, `None` for a leaf.
    pub fn label(&self) -> Option<&str> {
        match self {
            SyntaxTree::Leaf(_) => None,
            SyntaxTree::Node { label, .. } => Some(label),
        }
    }

    pub fn children(&self) -> &[SyntaxTree] {
        match self {
            SyntaxTree::Leaf(_) => &[],
            SyntaxTree::Node { children, .. } => children,
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, SyntaxTree::Leaf(_))
    }

    /// A node whose only child is a leaf.
    pub fn is_preterminal(&self) -> bool {
        matches!(self, SyntaxTree::Node { children, .. } if children.len() == 1 && children[0].is_leaf())
    }

    /// Leaf tokens, left to right.
    pub fn fringe(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_fringe(&mut out);
        out
    }

    fn collect_fringe<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            SyntaxTree::Leaf(token) => out.push(token),
            SyntaxTree::Node { children, .. } => {
                for child in children {
                    child.collect_fringe(out);
                }
            }
        }
    }

    /// The sentence as a sequence of characters.
    pub fn chars(&self) -> Vec<char> {
        self.fringe().iter().flat_map(|t| t.chars()).collect()
    }

    /// Number of internal nodes.
    pub fn internal_count(&self) -> usize {
        match self {
            SyntaxTree::Leaf(_) => 0,
            SyntaxTree::Node { children, .. } => {
                1 + children.iter().map(SyntaxTree::internal_count).sum::<usize>()
            }
        }
    }

    /// Checks the structural invariants: internal nodes are labeled and
    /// non-empty, leaf tokens are non-empty and free of whitespace and
    /// brackets.
    pub fn validate(&self) -> Result<()> {
        match self {
            SyntaxTree::Leaf(token) => {
                if token.is_empty() {
                    return Err(Error::InvalidTree("empty leaf token".into()));
                }
                if token.chars().any(|c| c.is_whitespace() || c == '(' || c == ')') {
                    return Err(Error::InvalidTree(format!(
                        "leaf token {token:?} contains whitespace or brackets"
                    )));
                }
                Ok(())
            }
            SyntaxTree::Node { label, children } => {
                if label.is_empty() || label.chars().any(|c| c.is_whitespace() || c == '(' || c == ')') {
                    return Err(Error::InvalidTree(format!("bad internal label {label:?}")));
                }
                if children.is_empty() {
                    return Err(Error::InvalidTree(format!("node {label} has no children")));
                }
                children.iter().try_for_each(SyntaxTree::validate)
            }
        }
    }
}

impl fmt::Display for SyntaxTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SyntaxTree::Leaf(token) => f.write_str(token),
            SyntaxTree::Node { label, children } => {
                write!(f, "({label}")?;
                for child in children {
                    write!(f, " {child}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Trees read from one source, in source order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Corpus {
    pub trees: Vec<SyntaxTree>,
    pub source_name: String,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    /// Reads a treebank file, optionally stripping function tags.
    pub fn read(path: impl AsRef<Path>, strip_tags: bool) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut corpus = parse_bracketed(&text)?;
        corpus.source_name = path.display().to_string();
        if strip_tags {
            corpus.trees = corpus.trees.iter().map(strip_function_tags).collect();
        }
        Ok(corpus)
    }

    /// One tree per line, newline-terminated.
    pub fn to_bracketed(&self) -> String {
        let mut out = String::new();
        for tree in &self.trees {
            out.push_str(&serialize_bracketed(tree));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TokenKind<'a> {
    Open,
    Close,
    Atom(&'a str),
}

#[derive(Debug, Clone, Copy)]
struct Token<'a> {
    kind: TokenKind<'a>,
    line: usize,
    column: usize,
}

fn tokenize<'a>(text: &'a str) -> Vec<Token<'a>> {
    let mut tokens = Vec::new();
    let mut line = 1;
    let mut column = 0;
    let mut atom_start: Option<(usize, usize, usize)> = None;

    let flush = |tokens: &mut Vec<Token<'a>>, start: &mut Option<(usize, usize, usize)>, end: usize| {
        if let Some((offset, l, c)) = start.take() {
            tokens.push(Token {
                kind: TokenKind::Atom(&text[offset..end]),
                line: l,
                column: c,
            });
        }
    };

    for (offset, ch) in text.char_indices() {
        column += 1;
        match ch {
            '(' | ')' => {
                flush(&mut tokens, &mut atom_start, offset);
                tokens.push(Token {
                    kind: if ch == '(' { TokenKind::Open } else { TokenKind::Close },
                    line,
                    column,
                });
            }
            c if c.is_whitespace() => {
                flush(&mut tokens, &mut atom_start, offset);
                if c == '\n' {
                    line += 1;
                    column = 0;
                }
            }
            _ => {
                if atom_start.is_none() {
                    atom_start = Some((offset, line, column));
                }
            }
        }
    }
    flush(&mut tokens, &mut atom_start, text.len());
    tokens
}

struct Reader<'a> {
    tokens: Vec<Token<'a>>,
    pos: usize,
    eof: (usize, usize),
}

impl<'a> Reader<'a> {
    fn peek(&self) -> Option<Token<'a>> {
        self.tokens.get(self.pos).copied()
    }

    fn error(&self, token: Option<Token<'a>>, message: impl Into<String>) -> Error {
        let (line, column) = token.map_or(self.eof, |t| (t.line, t.column));
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }

    /// Parses one bracketed tree starting at an `Open` token.
    fn tree(&mut self, top_level: bool) -> Result<SyntaxTree> {
        let open = self.peek();
        debug_assert!(matches!(open.map(|t| t.kind), Some(TokenKind::Open)));
        self.pos += 1;

        let label = match self.peek() {
            Some(Token {
                kind: TokenKind::Atom(a),
                ..
            }) => {
                self.pos += 1;
                a.to_string()
            }
            Some(Token {
                kind: TokenKind::Open,
                ..
            }) if top_level => TOP_LABEL.to_string(),
            Some(
                t @ Token {
                    kind: TokenKind::Open,
                    ..
                },
            ) => return Err(self.error(Some(t), "empty label on internal node")),
            Some(
                t @ Token {
                    kind: TokenKind::Close,
                    ..
                },
            ) => return Err(self.error(Some(t), "empty bracket pair")),
            None => return Err(self.error(open, "unbalanced '(': input ends inside tree")),
        };

        let mut children = Vec::new();
        loop {
            match self.peek() {
                Some(Token {
                    kind: TokenKind::Open,
                    ..
                }) => children.push(self.tree(false)?),
                Some(Token {
                    kind: TokenKind::Atom(a),
                    ..
                }) => {
                    self.pos += 1;
                    children.push(SyntaxTree::Leaf(a.to_string()));
                }
                Some(
                    t @ Token {
                        kind: TokenKind::Close,
                        ..
                    },
                ) => {
                    self.pos += 1;
                    if children.is_empty() {
                        return Err(self.error(Some(t), format!("node {label} has no tokens")));
                    }
                    return Ok(SyntaxTree::Node { label, children });
                }
                None => return Err(self.error(open, "unbalanced '(': input ends inside tree")),
            }
        }
    }
}

/// Parses zero or more bracketed trees.
pub fn parse_bracketed(text: &str) -> Result<Corpus> {
    let tokens = tokenize(text);
    let eof = text
        .lines()
        .enumerate()
        .last()
        .map_or((1, 0), |(i, l)| (i + 1, l.chars().count() + 1));
    let mut reader = Reader { tokens, pos: 0, eof };
    let mut trees = Vec::new();
    while let Some(token) = reader.peek() {
        match token.kind {
            TokenKind::Open => trees.push(reader.tree(true)?),
            TokenKind::Close => return Err(reader.error(Some(token), "unbalanced ')'")),
            TokenKind::Atom(a) => {
                return Err(reader.error(Some(token), format!("token {a:?} outside any bracket")))
            }
        }
    }
    Ok(Corpus {
        trees,
        source_name: String::new(),
    })
}

/// Parses exactly one tree.
pub fn parse_tree(text: &str) -> Result<SyntaxTree> {
    let mut corpus = parse_bracketed(text)?;
    match corpus.trees.len() {
        1 => Ok(corpus.trees.pop().unwrap()),
        n => Err(Error::Parse {
            line: 1,
            column: 0,
            message: format!("expected exactly one tree, found {n}"),
        }),
    }
}

/// Single-line bracketed form.
pub fn serialize_bracketed(tree: &SyntaxTree) -> String {
    tree.to_string()
}

/// Truncates labels at the first `-` or `=` (`NP-SBJ` -> `NP`). Labels that
/// start with the delimiter, such as `-NONE-`, are kept whole.
pub fn strip_label(label: &str) -> &str {
    match label.find(['-', '=']) {
        Some(cut) if cut > 0 => &label[..cut],
        _ => label,
    }
}

/// Removes function tags from every internal label.
pub fn strip_function_tags(tree: &SyntaxTree) -> SyntaxTree {
    match tree {
        SyntaxTree::Leaf(token) => SyntaxTree::Leaf(token.clone()),
        SyntaxTree::Node { label, children } => SyntaxTree::Node {
            label: strip_label(label).to_string(),
            children: children.iter().map(strip_function_tags).collect(),
        },
    }
}
