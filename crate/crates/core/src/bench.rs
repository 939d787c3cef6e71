//! Parsing throughput. Scores are computed once up front so the timed
//! repeats measure decoding (CKY plus conversion back to word trees);
//! end-to-end timing including scoring is measured separately on request.

use std::time::Instant;

use rayon::prelude::*;

use crate::decoder::DecodeConfig;
use crate::error::{Error, Result};
use crate::parse::{parse_chars, parse_scores};
use crate::scoring::{score_spans, LabelVocab, Scorer};

/// Sentences-per-second samples of one measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct Throughput {
    pub samples: Vec<f64>,
    pub mean: f64,
    pub std_dev: f64,
}

impl Throughput {
    fn from_samples(samples: Vec<f64>) -> Self {
        let k = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / k;
        let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / k;
        Throughput {
            samples,
            mean,
            std_dev: var.sqrt(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchReport {
    pub sentences: usize,
    pub repeats: usize,
    pub decode: Throughput,
    pub end_to_end: Option<Throughput>,
}

fn timed(sentences: usize, f: impl Fn() -> Result<()>) -> Result<f64> {
    let start = Instant::now();
    f()?;
    let secs = start.elapsed().as_secs_f64().max(1e-9);
    Ok(sentences as f64 / secs)
}

/// Runs `repeats` timed passes over `sentences` on the current rayon pool.
pub fn bench(
    scorer: &Scorer,
    vocab: &LabelVocab,
    sentences: &[Vec<char>],
    config: &DecodeConfig,
    repeats: usize,
    with_scoring: bool,
) -> Result<BenchReport> {
    if sentences.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if repeats == 0 {
        return Err(Error::Config("repeats must be positive".into()));
    }
    let scores = sentences
        .par_iter()
        .map(|c| score_spans(scorer, c, vocab, None))
        .collect::<Result<Vec<_>>>()?;

    let mut decode = Vec::with_capacity(repeats);
    for r in 0..repeats {
        let rate = timed(sentences.len(), || {
            sentences
                .par_iter()
                .zip(&scores)
                .try_for_each(|(c, s)| parse_scores(s, vocab, c, config).map(drop))
        })?;
        log::info!("decode repeat {} of {}: {rate:.1} sentences/sec", r + 1, repeats);
        decode.push(rate);
    }

    let end_to_end = if with_scoring {
        let mut samples = Vec::with_capacity(repeats);
        for r in 0..repeats {
            let rate = timed(sentences.len(), || {
                sentences
                    .par_iter()
                    .try_for_each(|c| parse_chars(scorer, vocab, c, config).map(drop))
            })?;
            log::info!("end-to-end repeat {} of {}: {rate:.1} sentences/sec", r + 1, repeats);
            samples.push(rate);
        }
        Some(Throughput::from_samples(samples))
    } else {
        None
    };

    Ok(BenchReport {
        sentences: sentences.len(),
        repeats,
        decode: Throughput::from_samples(decode),
        end_to_end,
    })
}
