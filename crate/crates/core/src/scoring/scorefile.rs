//! Text interchange format for span scores computed outside this crate.
//!
//! ```text
//! #scores <sentence-id> <n> <L>
//! #labels NULL <label_1> ... <label_{L-1}>
//! <i> <j> <v_0> ... <v_{L-1}>        (n(n+1)/2 lines, lexicographic (i, j))
//!
//! #scores ...
//! ```
//!
//! Values are written with 17 significant digits, which round-trips every
//! finite `f64` exactly.

use std::io::Write;

use super::{span_count, LabelVocab, SpanScores};
use crate::chartransform::{label_from_file, label_to_file};
use crate::error::{Error, Result};

/// One sentence of a score file.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreBlock {
    pub id: String,
    pub scores: SpanScores,
    pub vocab: LabelVocab,
}

fn io_err(e: std::io::Error) -> Error {
    Error::Io {
        path: "<score sink>".into(),
        source: e,
    }
}

/// Writes one sentence block followed by a blank line.
pub fn write_scores(
    scores: &SpanScores,
    vocab: &LabelVocab,
    sentence_id: &str,
    sink: &mut impl Write,
) -> Result<()> {
    if scores.num_labels() != vocab.len() {
        return Err(Error::Dimension(format!(
            "{} score columns for {} labels",
            scores.num_labels(),
            vocab.len()
        )));
    }
    if sentence_id.is_empty() || sentence_id.chars().any(char::is_whitespace) {
        return Err(Error::ScoreFile(format!("bad sentence id {sentence_id:?}")));
    }
    if let Some(v) = scores.values().iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("cannot write score {v}")));
    }
    let mut out = String::new();
    out.push_str(&format!("#scores {} {} {}\n#labels", sentence_id, scores.n(), vocab.len()));
    for label in vocab.labels() {
        out.push(' ');
        out.push_str(&label_to_file(label));
    }
    out.push('\n');
    for (i, j) in scores.spans() {
        out.push_str(&format!("{i} {j}"));
        for v in scores.span(i, j) {
            out.push_str(&format!(" {v:.16e}"));
        }
        out.push('\n');
    }
    out.push('\n');
    sink.write_all(out.as_bytes()).map_err(io_err)
}

fn malformed(line: usize, what: impl std::fmt::Display) -> Error {
    Error::ScoreFile(format!("line {line}: {what}"))
}

fn parse_usize(field: Option<&str>, line: usize, what: &str) -> Result<usize> {
    let field = field.ok_or_else(|| malformed(line, format!("malformed header: missing {what}")))?;
    field
        .parse()
        .map_err(|_| malformed(line, format!("malformed header: {what} {field:?} is not a count")))
}

/// Parses every block of a score file.
pub fn read_score_file(text: &str) -> Result<Vec<ScoreBlock>> {
    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l)).peekable();
    let mut blocks = Vec::new();
    loop {
        while matches!(lines.peek(), Some((_, l)) if l.trim().is_empty()) {
            lines.next();
        }
        let Some((lineno, header)) = lines.next() else {
            break;
        };
        let mut fields = header.split_whitespace();
        if fields.next() != Some("#scores") {
            return Err(malformed(lineno, "malformed header: expected '#scores <id> <n> <L>'"));
        }
        let id = fields
            .next()
            .ok_or_else(|| malformed(lineno, "malformed header: missing sentence id"))?
            .to_string();
        let n = parse_usize(fields.next(), lineno, "n")?;
        let num_labels = parse_usize(fields.next(), lineno, "L")?;
        if fields.next().is_some() {
            return Err(malformed(lineno, "malformed header: trailing fields"));
        }
        if n == 0 {
            return Err(malformed(lineno, "malformed header: n must be positive"));
        }

        let (lineno, label_line) = lines
            .next()
            .ok_or_else(|| malformed(lineno + 1, "malformed header: missing #labels line"))?;
        let mut fields = label_line.split_whitespace();
        if fields.next() != Some("#labels") {
            return Err(malformed(lineno, "malformed header: expected '#labels ...'"));
        }
        let labels: Vec<String> = fields.map(label_from_file).collect();
        if labels.len() != num_labels {
            return Err(malformed(
                lineno,
                format!("malformed header: {} labels listed, header says {num_labels}", labels.len()),
            ));
        }
        let vocab = LabelVocab::from_labels(labels).map_err(|e| malformed(lineno, e))?;

        let expected = span_count(n);
        let mut values = Vec::with_capacity(expected * num_labels);
        let mut rows = Vec::with_capacity(expected);
        while let Some(row) = lines.next_if(|(_, l)| !l.trim().is_empty() && !l.starts_with('#')) {
            rows.push(row);
        }
        if rows.len() != expected {
            return Err(Error::ScoreFile(format!(
                "sentence {id}: span count mismatch: expected {expected}, found {}",
                rows.len()
            )));
        }
        let expected_spans = (0..n).flat_map(|i| (i + 1..=n).map(move |j| (i, j)));
        for ((lineno, line), want) in rows.into_iter().zip(expected_spans) {
            let mut fields = line.split_whitespace();
            let mut coord = |what: &str| -> Result<usize> {
                let f = fields.next().ok_or_else(|| malformed(lineno, format!("missing {what}")))?;
                f.parse()
                    .map_err(|_| malformed(lineno, format!("non-numeric value {f:?} for {what}")))
            };
            let (i, j) = (coord("i")?, coord("j")?);
            if (i, j) != want {
                return Err(malformed(
                    lineno,
                    format!("expected span {} {}, found {i} {j}", want.0, want.1),
                ));
            }
            let row: Vec<&str> = fields.collect();
            if row.len() != num_labels {
                return Err(malformed(
                    lineno,
                    format!("expected {num_labels} values, found {}", row.len()),
                ));
            }
            for f in row {
                let v: f64 = f
                    .parse()
                    .map_err(|_| malformed(lineno, format!("non-numeric value {f:?}")))?;
                if !v.is_finite() {
                    return Err(malformed(lineno, format!("non-finite value {f:?}")));
                }
                values.push(v);
            }
        }
        let scores = SpanScores::from_values(n, num_labels, values)?;
        blocks.push(ScoreBlock { id, scores, vocab });
    }
    Ok(blocks)
}

/// Parses the first block of a score file.
pub fn read_scores(text: &str) -> Result<(SpanScores, LabelVocab)> {
    let mut blocks = read_score_file(text)?;
    if blocks.is_empty() {
        return Err(Error::ScoreFile("missing header".into()));
    }
    let b = blocks.swap_remove(0);
    Ok((b.scores, b.vocab))
}
