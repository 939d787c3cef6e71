//! Random instances and finite-difference gradient checks shared by the
//! integration tests.

#![allow(dead_code)]

use charparse::losses::tree_loss_with_prediction;
use charparse::scoring::{mlp_backward, oracle_scores, MlpHead, SpanRepresentation};
use charparse::synthetic::{generate, SynthConfig};
use charparse::{
    build_vocab, gold_span_labels, label_loss, to_char_tree, CharTree, DecodeConfig, LabelLossSpans, LabelVocab,
    MarginMode, SpanScores,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EXTRA_LABELS: [&str; 4] = ["NP", "VP", "NN+@1", "IP"];

/// `∅`, `@1`, `@2` and then `l - 3` phrase labels.
pub fn vocab_of_size(l: usize) -> LabelVocab {
    assert!((3..=3 + EXTRA_LABELS.len()).contains(&l));
    let mut labels: Vec<String> = ["∅", "@1", "@2"].iter().map(|s| s.to_string()).collect();
    labels.extend(EXTRA_LABELS[..l - 3].iter().map(|s| s.to_string()));
    LabelVocab::from_labels(labels).unwrap()
}

pub fn uniform_scores(n: usize, l: usize, lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> SpanScores {
    let values = (0..n * (n + 1) / 2 * l).map(|_| rng.gen_range(lo..=hi)).collect();
    SpanScores::from_values(n, l, values).unwrap()
}

pub fn chars_of(n: usize) -> Vec<char> {
    (0..n).map(|k| char::from_u32('a' as u32 + k as u32).unwrap()).collect()
}

/// A decoding instance with `n <= max_n`, `L` in `{3, 4}` and scores uniform
/// in `[-1, 1]`; odd seeds decode without masks.
pub struct DecodeInstance {
    pub scores: SpanScores,
    pub vocab: LabelVocab,
    pub chars: Vec<char>,
    pub config: DecodeConfig,
}

pub fn decode_instance(seed: u64, max_n: usize) -> DecodeInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_n);
    let l = rng.gen_range(3..=4);
    DecodeInstance {
        scores: uniform_scores(n, l, -1.0, 1.0, &mut rng),
        vocab: vocab_of_size(l),
        chars: chars_of(n),
        config: if seed.is_multiple_of(2) {
            DecodeConfig::default()
        } else {
            DecodeConfig::unconstrained()
        },
    }
}

/// A small gold character tree (one to three words) with its vocabulary.
pub fn small_gold(seed: u64) -> (CharTree, LabelVocab) {
    let config = SynthConfig {
        seed,
        min_words: 1,
        max_words: 3,
        alphabet: 40,
        unary_rate: 0.3,
    };
    let tree = to_char_tree(&generate(1, &config)[0]).unwrap();
    let vocab = build_vocab([&tree]).unwrap();
    (tree, vocab)
}

fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6)
}

#[derive(Clone, Copy, Debug, Default)]
pub struct GradCheck {
    pub max_rel_err: f64,
    pub compared: usize,
}

impl GradCheck {
    fn record(&mut self, analytic: f64, numeric: f64) {
        self.max_rel_err = self.max_rel_err.max(rel_err(analytic, numeric));
        self.compared += 1;
    }
}

const MLP_STEP: f64 = 1e-4;

/// Central differences of `upstream . head(rep)` against [`mlp_backward`]
/// for a head with D = 8, H = 4, L = 3, away from ReLU kinks.
pub fn mlp_grad_check(seed: u64) -> GradCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (head, rep) = loop {
        let mut head = MlpHead::new(8, 4, 3, 0.0, rng.gen());
        for b in head.b1_mut() {
            *b = rng.gen_range(-0.3..0.3);
        }
        for b in head.b2_mut() {
            *b = rng.gen_range(-0.3..0.3);
        }
        let k = rng.gen_range(1..=4);
        let rep = SpanRepresentation {
            ids: (0..k).map(|_| rng.gen_range(0..8)).collect(),
            dim: 8,
        };
        let pre: Vec<f64> = (0..4)
            .map(|h| head.b1()[h] + rep.ids.iter().map(|&id| head.row(id)[h]).sum::<f64>())
            .collect();
        if pre.iter().all(|p| p.abs() > 1e-2) {
            break (head, rep);
        }
    };
    let upstream: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let f = |h: &MlpHead| -> f64 { h.forward(&rep).iter().zip(&upstream).map(|(o, u)| o * u).sum() };
    let grad = mlp_backward(&head, &rep, &upstream).unwrap();

    let mut check = GradCheck::default();
    let mut central = |perturb: &dyn Fn(&mut MlpHead, f64), analytic: f64| {
        let mut plus = head.clone();
        perturb(&mut plus, MLP_STEP);
        let mut minus = head.clone();
        perturb(&mut minus, -MLP_STEP);
        check.record(analytic, (f(&plus) - f(&minus)) / (2.0 * MLP_STEP));
    };
    let mut ids = rep.ids.clone();
    ids.sort_unstable();
    ids.dedup();
    for &id in &ids {
        for h in 0..4 {
            central(&|m, d| m.row_mut(id)[h] += d, grad.w1[&id][h]);
        }
    }
    for h in 0..4 {
        central(&|m, d| m.b1_mut()[h] += d, grad.b1[h]);
    }
    for k in 0..12 {
        central(&|m, d| m.w2_mut()[k] += d, grad.w2[k]);
    }
    for k in 0..3 {
        central(&|m, d| m.b2_mut()[k] += d, grad.b2[k]);
    }
    check
}

fn sample_coords(scores: &SpanScores, count: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize, usize)> {
    let mut all: Vec<(usize, usize, usize)> = scores
        .spans()
        .flat_map(|(i, j)| (0..scores.num_labels()).map(move |l| (i, j, l)))
        .collect();
    all.shuffle(rng);
    all.truncate(count);
    all
}

fn nudged(scores: &SpanScores, (i, j, l): (usize, usize, usize), delta: f64) -> SpanScores {
    let mut s = scores.clone();
    s.set(i, j, l, s.get(i, j, l) + delta);
    s
}

const LABEL_STEP: f64 = 1e-5;

/// Central differences of the label loss over up to 80 sampled score
/// entries. Even seeds sum over all spans, odd seeds over gold spans.
pub fn label_loss_grad_check(seed: u64) -> GradCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (tree, vocab) = small_gold(seed);
    let gold = gold_span_labels(&tree).unwrap();
    let scores = uniform_scores(tree.len(), vocab.len(), -2.0, 2.0, &mut rng);
    let spans = if seed.is_multiple_of(2) {
        LabelLossSpans::All
    } else {
        LabelLossSpans::Gold
    };
    let f = |s: &SpanScores| label_loss(s, &gold, &vocab, spans).unwrap().value;
    let base = label_loss(&scores, &gold, &vocab, spans).unwrap();
    let mut check = GradCheck::default();
    for coord in sample_coords(&scores, 80, &mut rng) {
        let numeric = (f(&nudged(&scores, coord, LABEL_STEP)) - f(&nudged(&scores, coord, -LABEL_STEP)))
            / (2.0 * LABEL_STEP);
        check.record(base.gradient.get(&coord).copied().unwrap_or(0.0), numeric);
    }
    check
}

const TREE_STEP: f64 = 1e-4;

/// Central differences of the tree loss at coordinates where a step in
/// either direction changes neither the predicted tree nor the active side
/// of the hinge. Every third seed starts from noisy oracle scores so that
/// the prediction is often gold.
pub fn tree_loss_grad_check(seed: u64, mode: MarginMode) -> GradCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7ee);
    let (tree, vocab) = small_gold(seed);
    let config = DecodeConfig::default();
    let mut scores = uniform_scores(tree.len(), vocab.len(), -1.0, 1.0, &mut rng);
    if seed.is_multiple_of(3) {
        let oracle = oracle_scores(&gold_span_labels(&tree).unwrap(), &vocab).unwrap();
        let noisy = scores.values().iter().zip(oracle.values()).map(|(u, o)| o + 0.3 * u).collect();
        scores = SpanScores::from_values(tree.len(), vocab.len(), noisy).unwrap();
    }
    let run = |s: &SpanScores| tree_loss_with_prediction(s, &tree, &vocab, &config, mode).unwrap();
    let base = run(&scores);

    let mut coords = sample_coords(&scores, 60, &mut rng);
    coords.extend(base.loss.gradient.keys().copied());
    coords.sort_unstable();
    coords.dedup();

    let mut check = GradCheck::default();
    for coord in coords {
        let plus = run(&nudged(&scores, coord, TREE_STEP));
        let minus = run(&nudged(&scores, coord, -TREE_STEP));
        let stable = plus.predicted == base.predicted
            && minus.predicted == base.predicted
            && (plus.loss.value > 0.0) == (base.loss.value > 0.0)
            && (minus.loss.value > 0.0) == (base.loss.value > 0.0);
        if !stable {
            continue;
        }
        let numeric = (plus.loss.value - minus.loss.value) / (2.0 * TREE_STEP);
        check.record(base.loss.gradient.get(&coord).copied().unwrap_or(0.0), numeric);
    }
    check
}
