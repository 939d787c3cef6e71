//! Mini-batch training with the two-phase loss schedule: label loss for
//! the first `label_loss_epochs` epochs, tree loss afterwards. The learning
//! rate is halved (by `decay_factor`) whenever dev parse F1 fails to improve
//! for `decay_patience` epochs; training ends after `max_decay` decays or
//! `max_epochs` epochs and returns the best-dev checkpoint.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chartransform::{gold_span_labels, to_char_tree, CharTree, GoldSpanMap};
use crate::decoder::DecodeConfig;
use crate::error::{Error, Result};
use crate::eval::{joint_report, JointReport};
use crate::losses::{label_loss, tree_loss, LabelLossSpans, LossValue, MarginMode};
use crate::parse::parse_chars;
use crate::scoring::{
    build_vocab, span_representation, ForwardCache, LabelVocab, LinearScorer, MlpHead, Scorer, SpanRepresentation,
    SpanScores, DEFAULT_DIM,
};
use crate::treebank::SyntaxTree;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScorerKind {
    Linear,
    Mlp,
}

impl FromStr for ScorerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" | "feature" => Ok(ScorerKind::Linear),
            "mlp" => Ok(ScorerKind::Mlp),
            _ => Err(Error::Config(format!("unknown scorer {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub scorer: ScorerKind,
    pub learning_rate: f64,
    pub decay_factor: f64,
    pub decay_patience: usize,
    pub max_decay: usize,
    pub batch_size: usize,
    pub label_loss_epochs: usize,
    pub max_epochs: usize,
    pub mlp_hidden: usize,
    pub dropout: f64,
    pub seed: u64,
    pub margin_mode: MarginMode,
    pub label_loss_spans: LabelLossSpans,
    pub feature_dim: usize,
    pub constrain_char_labels: bool,
    pub require_nonnull_root: bool,
}

impl Default for TrainConfig {
    /// Hyper-parameters of the encoder-based setup: MLP head, learning rate
    /// 1e-5.
    fn default() -> Self {
        TrainConfig {
            scorer: ScorerKind::Mlp,
            learning_rate: 1e-5,
            decay_factor: 0.5,
            decay_patience: 3,
            max_decay: 10,
            batch_size: 250,
            label_loss_epochs: 10,
            max_epochs: 200,
            mlp_hidden: 250,
            dropout: 0.2,
            seed: 1,
            margin_mode: MarginMode::Flat,
            label_loss_spans: LabelLossSpans::All,
            feature_dim: DEFAULT_DIM,
            constrain_char_labels: true,
            require_nonnull_root: true,
        }
    }
}

impl TrainConfig {
    /// Linear scorer over hashed features, learning rate 0.1, one sentence
    /// per update.
    pub fn feature_preset() -> Self {
        TrainConfig {
            scorer: ScorerKind::Linear,
            learning_rate: 0.1,
            batch_size: 1,
            ..TrainConfig::default()
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "mlp" => Ok(TrainConfig::default()),
            "feature" | "linear" => Ok(TrainConfig::feature_preset()),
            _ => Err(Error::Config(format!("unknown preset {name:?}"))),
        }
    }

    pub fn decode_config(&self) -> DecodeConfig {
        DecodeConfig {
            constrain_char_labels: self.constrain_char_labels,
            require_nonnull_root: self.require_nonnull_root,
        }
    }

    /// Sets one option by name.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::Config(format!("bad value {value:?} for {key}")))
        }
        match key {
            "scorer" => self.scorer = value.parse()?,
            "learning_rate" => self.learning_rate = parse(key, value)?,
            "decay_factor" => self.decay_factor = parse(key, value)?,
            "decay_patience" => self.decay_patience = parse(key, value)?,
            "max_decay" => self.max_decay = parse(key, value)?,
            "batch_size" => self.batch_size = parse(key, value)?,
            "label_loss_epochs" => self.label_loss_epochs = parse(key, value)?,
            "max_epochs" => self.max_epochs = parse(key, value)?,
            "mlp_hidden" => self.mlp_hidden = parse(key, value)?,
            "dropout" => self.dropout = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "margin_mode" => self.margin_mode = value.parse()?,
            "label_loss_spans" => {
                self.label_loss_spans = match value {
                    "all" => LabelLossSpans::All,
                    "gold" => LabelLossSpans::Gold,
                    _ => return Err(Error::Config(format!("bad value {value:?} for {key}"))),
                }
            }
            "feature_dim" => self.feature_dim = parse(key, value)?,
            "constrain_char_labels" => self.constrain_char_labels = parse(key, value)?,
            "require_nonnull_root" => self.require_nonnull_root = parse(key, value)?,
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines on top of `self`. A `preset` key, if
    /// present, must come first. `#` starts a comment.
    pub fn apply_key_values(&mut self, text: &str) -> Result<()> {
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", k + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if key == "preset" {
                *self = TrainConfig::preset(value)?;
            } else {
                self.set(key, value)
                    .map_err(|e| Error::Config(format!("line {}: {e}", k + 1)))?;
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("learning_rate", self.learning_rate > 0.0),
            ("decay_factor", self.decay_factor > 0.0 && self.decay_factor < 1.0),
            ("decay_patience", self.decay_patience > 0),
            ("max_decay", self.max_decay > 0),
            ("batch_size", self.batch_size > 0),
            ("max_epochs", self.max_epochs > 0),
            ("mlp_hidden", self.mlp_hidden > 0),
            ("dropout", (0.0..1.0).contains(&self.dropout)),
            ("feature_dim", self.feature_dim > 0 && self.feature_dim <= 1 << 32),
        ];
        for (name, ok) in positive {
            if !ok {
                return Err(Error::Config(format!("{name} out of range")));
            }
        }
        Ok(())
    }
}

/// Learning-rate decay on plateau.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LrSchedule {
    pub learning_rate: f64,
    pub best: f64,
    pub stale_epochs: usize,
    pub decays: usize,
    factor: f64,
    patience: usize,
    max_decay: usize,
}

/// What the schedule did after an epoch.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScheduleStep {
    Improved,
    Waiting,
    Decayed,
    Exhausted,
}

impl LrSchedule {
    pub fn new(learning_rate: f64, factor: f64, patience: usize, max_decay: usize) -> Self {
        LrSchedule {
            learning_rate,
            best: f64::NEG_INFINITY,
            stale_epochs: 0,
            decays: 0,
            factor,
            patience,
            max_decay,
        }
    }

    pub fn observe(&mut self, metric: f64) -> ScheduleStep {
        if metric > self.best {
            self.best = metric;
            self.stale_epochs = 0;
            return ScheduleStep::Improved;
        }
        self.stale_epochs += 1;
        if self.stale_epochs < self.patience {
            return ScheduleStep::Waiting;
        }
        self.stale_epochs = 0;
        self.decays += 1;
        self.learning_rate *= self.factor;
        if self.decays >= self.max_decay {
            ScheduleStep::Exhausted
        } else {
            ScheduleStep::Decayed
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    Label,
    Tree,
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LossKind::Label => "label",
            LossKind::Tree => "tree",
        })
    }
}

/// Loss kind used in a 1-based epoch.
pub fn loss_kind_for_epoch(epoch: usize, label_loss_epochs: usize) -> LossKind {
    if epoch <= label_loss_epochs {
        LossKind::Label
    } else {
        LossKind::Tree
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss_kind: LossKind,
    pub loss: f64,
    pub learning_rate: f64,
    pub dev_seg_f1: f64,
    pub dev_parse_f1: f64,
    pub decays: usize,
}

impl fmt::Display for EpochRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "epoch {} loss={} value={:.6} lr={:e} dev_seg_f1={:.4} dev_par_f1={:.4} decays={}",
            self.epoch, self.loss_kind, self.loss, self.learning_rate, self.dev_seg_f1, self.dev_parse_f1, self.decays
        )
    }
}

const CHECKPOINT_FORMAT: &str = "charparse-checkpoint";
const CHECKPOINT_VERSION: u32 = 1;

/// Trained scorer with its vocabulary and training state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub scorer: Scorer,
    pub vocab: LabelVocab,
    pub decode: DecodeConfigDef,
    pub epoch: usize,
    pub best_dev_f1: f64,
    pub decays: usize,
}

/// Serializable mirror of [`DecodeConfig`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeConfigDef {
    pub constrain_char_labels: bool,
    pub require_nonnull_root: bool,
}

impl From<DecodeConfig> for DecodeConfigDef {
    fn from(c: DecodeConfig) -> Self {
        DecodeConfigDef {
            constrain_char_labels: c.constrain_char_labels,
            require_nonnull_root: c.require_nonnull_root,
        }
    }
}

impl From<DecodeConfigDef> for DecodeConfig {
    fn from(c: DecodeConfigDef) -> Self {
        DecodeConfig {
            constrain_char_labels: c.constrain_char_labels,
            require_nonnull_root: c.require_nonnull_root,
        }
    }
}

impl Checkpoint {
    pub fn new(scorer: Scorer, vocab: LabelVocab, decode: DecodeConfig) -> Self {
        Checkpoint {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            scorer,
            vocab,
            decode: decode.into(),
            epoch: 0,
            best_dev_f1: 0.0,
            decays: 0,
        }
    }

    pub fn decode_config(&self) -> DecodeConfig {
        self.decode.into()
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Checkpoint(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let ckpt: Checkpoint = serde_json::from_str(text).map_err(|e| Error::Checkpoint(e.to_string()))?;
        if ckpt.format != CHECKPOINT_FORMAT || ckpt.version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported checkpoint {} v{}",
                ckpt.format, ckpt.version
            )));
        }
        if ckpt.scorer.num_labels() != ckpt.vocab.len() {
            return Err(Error::Checkpoint("scorer and vocabulary sizes disagree".into()));
        }
        Ok(ckpt)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(self.to_json()?.as_bytes())
            .map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Checkpoint::from_json(&text)
    }
}

/// Final checkpoint plus one record per epoch.
#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub checkpoint: Checkpoint,
    pub history: Vec<EpochRecord>,
}

struct Example {
    chars: Vec<char>,
    gold_tree: CharTree,
    gold_spans: GoldSpanMap,
}

fn prepare(corpus: &[SyntaxTree]) -> Result<Vec<Example>> {
    corpus
        .iter()
        .enumerate()
        .map(|(k, t)| {
            let gold_tree = to_char_tree(t).map_err(|e| Error::Transform(format!("tree {}: {e}", k + 1)))?;
            Ok(Example {
                chars: gold_tree.chars(),
                gold_spans: gold_span_labels(&gold_tree)?,
                gold_tree,
            })
        })
        .collect()
}

fn derive_seed(seed: u64, a: u64, b: u64) -> u64 {
    seed ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ b.wrapping_mul(0xC2B2_AE3D_27D4_EB4F)
}

/// Forward pass over every span of one sentence, keeping what backward needs.
fn forward_sentence(
    scorer: &Scorer,
    chars: &[char],
    num_labels: usize,
    dropout_seed: Option<u64>,
) -> Result<(SpanScores, Vec<(SpanRepresentation, ForwardCache)>)> {
    let n = chars.len();
    let mut rng = dropout_seed.map(ChaCha8Rng::seed_from_u64);
    let mut scores = SpanScores::zeros(n, num_labels);
    let mut caches = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i + 1..=n {
            let rep = span_representation(chars, i, j, scorer.dim())?;
            let (out, cache) = scorer.forward(&rep, rng.as_mut());
            scores.span_mut(i, j).copy_from_slice(&out);
            caches.push((rep, cache));
        }
    }
    Ok((scores, caches))
}

fn backprop(
    scorer: &Scorer,
    n: usize,
    num_labels: usize,
    loss: &LossValue,
    caches: &[(SpanRepresentation, ForwardCache)],
    scale: f64,
    grad: &mut crate::scoring::ScorerGrad,
) {
    let mut upstream = vec![0.0; num_labels];
    let mut current: Option<(usize, usize)> = None;
    let flush = |span: (usize, usize), upstream: &mut Vec<f64>, grad: &mut crate::scoring::ScorerGrad| {
        let (rep, cache) = &caches[crate::scoring::span_index(n, span.0, span.1)];
        scorer.backward(rep, cache, upstream, grad);
        upstream.iter_mut().for_each(|u| *u = 0.0);
    };
    for (&(i, j, l), &g) in &loss.gradient {
        if current != Some((i, j)) {
            if let Some(span) = current {
                flush(span, &mut upstream, grad);
            }
            current = Some((i, j));
        }
        upstream[l] += g * scale;
    }
    if let Some(span) = current {
        flush(span, &mut upstream, grad);
    }
}

/// Decodes every dev sentence with `scorer` and scores it against gold.
pub fn evaluate(
    scorer: &Scorer,
    vocab: &LabelVocab,
    decode: &DecodeConfig,
    gold: &[SyntaxTree],
) -> Result<JointReport> {
    let preds = gold
        .par_iter()
        .map(|t| parse_chars(scorer, vocab, &t.chars(), decode).map(|p| p.tree))
        .collect::<Result<Vec<_>>>()?;
    joint_report(gold, &preds)
}

/// Dev-set segmentation and parse metrics of a checkpoint.
pub fn evaluate_dev(checkpoint: &Checkpoint, dev_corpus: &[SyntaxTree]) -> Result<JointReport> {
    evaluate(&checkpoint.scorer, &checkpoint.vocab, &checkpoint.decode_config(), dev_corpus)
}

pub fn train(train_corpus: &[SyntaxTree], dev_corpus: &[SyntaxTree], config: &TrainConfig) -> Result<TrainOutcome> {
    train_with_callback(train_corpus, dev_corpus, config, |_| {})
}

/// [`train`] with a hook called after every epoch.
pub fn train_with_callback(
    train_corpus: &[SyntaxTree],
    dev_corpus: &[SyntaxTree],
    config: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<TrainOutcome> {
    config.validate()?;
    if train_corpus.is_empty() || dev_corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let examples = prepare(train_corpus)?;
    // dev trees must be transformable too
    prepare(dev_corpus)?;
    let vocab = build_vocab(examples.iter().map(|e| &e.gold_tree))?;
    let num_labels = vocab.len();
    let decode = config.decode_config();

    let mut scorer = match config.scorer {
        ScorerKind::Linear => Scorer::Linear(LinearScorer::new(config.feature_dim, num_labels)),
        ScorerKind::Mlp => Scorer::Mlp(MlpHead::new(
            config.feature_dim,
            config.mlp_hidden,
            num_labels,
            config.dropout,
            config.seed,
        )),
    };
    let use_dropout = matches!(config.scorer, ScorerKind::Mlp) && config.dropout > 0.0;

    let mut schedule = LrSchedule::new(
        config.learning_rate,
        config.decay_factor,
        config.decay_patience,
        config.max_decay,
    );
    let mut best = Checkpoint::new(scorer.clone(), vocab.clone(), decode);
    let mut history = Vec::new();
    let mut order: Vec<usize> = (0..examples.len()).collect();

    for epoch in 1..=config.max_epochs {
        let kind = loss_kind_for_epoch(epoch, config.label_loss_epochs);
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, epoch as u64, 0));
        order.shuffle(&mut rng);
        let lr = schedule.learning_rate;
        let mut epoch_loss = 0.0;

        for (batch_id, batch) in order.chunks(config.batch_size).enumerate() {
            let mut grad = scorer.zero_grad();
            let scale = 1.0 / batch.len() as f64;
            let mut batch_loss = 0.0;
            for &idx in batch {
                let ex = &examples[idx];
                let dropout_seed = use_dropout.then(|| derive_seed(config.seed, epoch as u64, idx as u64 + 1));
                let (scores, caches) = forward_sentence(&scorer, &ex.chars, num_labels, dropout_seed)?;
                let loss = match kind {
                    LossKind::Label => label_loss(&scores, &ex.gold_spans, &vocab, config.label_loss_spans)?,
                    LossKind::Tree => tree_loss(&scores, &ex.gold_tree, &vocab, &decode, config.margin_mode)?,
                };
                if !loss.value.is_finite() {
                    return Err(Error::Divergence {
                        epoch,
                        batch: batch_id,
                        loss: loss.value,
                    });
                }
                batch_loss += loss.value;
                backprop(&scorer, ex.chars.len(), num_labels, &loss, &caches, scale, &mut grad);
            }
            scorer.apply(&grad, lr);
            epoch_loss += batch_loss;
        }

        let report = evaluate(&scorer, &vocab, &decode, dev_corpus)?;
        let step = schedule.observe(report.parse.f1);
        if step == ScheduleStep::Improved {
            best.scorer = scorer.clone();
            best.epoch = epoch;
            best.best_dev_f1 = report.parse.f1;
        }
        best.decays = schedule.decays;
        let record = EpochRecord {
            epoch,
            loss_kind: kind,
            loss: epoch_loss / examples.len() as f64,
            learning_rate: lr,
            dev_seg_f1: report.seg.f1,
            dev_parse_f1: report.parse.f1,
            decays: schedule.decays,
        };
        log::info!("{record}");
        on_epoch(&record);
        history.push(record);
        if step == ScheduleStep::Exhausted {
            break;
        }
    }
    Ok(TrainOutcome {
        checkpoint: best,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loss_switch_after_label_epochs() {
        assert_eq!(loss_kind_for_epoch(1, 10), LossKind::Label);
        assert_eq!(loss_kind_for_epoch(10, 10), LossKind::Label);
        assert_eq!(loss_kind_for_epoch(11, 10), LossKind::Tree);
    }

    #[test]
    fn ten_decays_then_stop() {
        let mut s = LrSchedule::new(1.0, 0.5, 3, 10);
        assert_eq!(s.observe(0.5), ScheduleStep::Improved);
        let mut steps = Vec::new();
        loop {
            let step = s.observe(0.1);
            steps.push(step);
            assert!(s.learning_rate <= 1.0);
            if step == ScheduleStep::Exhausted {
                break;
            }
        }
        assert_eq!(steps.len(), 30);
        assert_eq!(s.decays, 10);
        assert_eq!(s.learning_rate, 2f64.powi(-10));
    }

    #[test]
    fn improvement_resets_patience() {
        let mut s = LrSchedule::new(1.0, 0.5, 3, 10);
        s.observe(0.1);
        s.observe(0.1);
        s.observe(0.1);
        assert_eq!(s.observe(0.2), ScheduleStep::Improved);
        assert_eq!(s.observe(0.2), ScheduleStep::Waiting);
        assert_eq!(s.observe(0.2), ScheduleStep::Waiting);
        assert_eq!(s.observe(0.2), ScheduleStep::Decayed);
        assert_eq!(s.learning_rate, 0.5);
    }

    #[test]
    fn key_value_config() {
        let mut c = TrainConfig::default();
        c.apply_key_values("preset = feature\n# comment\nbatch_size = 10\nmargin_mode=hamming\n")
            .unwrap();
        assert_eq!(c.scorer, ScorerKind::Linear);
        assert_eq!(c.learning_rate, 0.1);
        assert_eq!(c.batch_size, 10);
        assert_eq!(c.margin_mode, MarginMode::Hamming);
        assert!(c.apply_key_values("bogus = 1").is_err());
        assert!(c.apply_key_values("batch_size = x").is_err());
        assert!(c.apply_key_values("just words").is_err());
    }

    #[test]
    fn mlp_defaults() {
        let c = TrainConfig::default();
        assert_eq!(c.learning_rate, 1e-5);
        assert_eq!(c.decay_factor, 0.5);
        assert_eq!(c.max_decay, 10);
        assert_eq!(c.decay_patience, 3);
        assert_eq!(c.batch_size, 250);
        assert_eq!(c.mlp_hidden, 250);
        assert_eq!(c.dropout, 0.2);
        assert_eq!(c.label_loss_epochs, 10);
    }

    #[test]
    fn validation() {
        let c = TrainConfig {
            dropout: 1.0,
            ..TrainConfig::default()
        };
        assert!(c.validate().is_err());
        let c = TrainConfig {
            batch_size: 0,
            ..TrainConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn checkpoint_reload_gives_identical_metrics() {
        let corpus = crate::synthetic::generate(6, &crate::synthetic::SynthConfig::small(5));
        for mut config in [TrainConfig::feature_preset(), TrainConfig::default()] {
            config.max_epochs = 2;
            config.feature_dim = 1 << 12;
            config.mlp_hidden = 8;
            config.learning_rate = 0.05;
            let out = train(&corpus, &corpus, &config).unwrap();
            let path = std::env::temp_dir().join(format!("charparse-ckpt-{:?}-{}.json", config.scorer, std::process::id()));
            out.checkpoint.save(&path).unwrap();
            let loaded = Checkpoint::load(&path).unwrap();
            std::fs::remove_file(&path).unwrap();
            assert_eq!(loaded, out.checkpoint);
            assert_eq!(
                evaluate_dev(&loaded, &corpus).unwrap(),
                evaluate_dev(&out.checkpoint, &corpus).unwrap()
            );
        }
    }

    #[test]
    fn same_seed_same_parameters() {
        let corpus = crate::synthetic::generate(5, &crate::synthetic::SynthConfig::small(6));
        let config = TrainConfig {
            max_epochs: 2,
            feature_dim: 1 << 10,
            mlp_hidden: 6,
            ..TrainConfig::default()
        };
        let a = train(&corpus, &corpus, &config).unwrap().checkpoint.to_json().unwrap();
        let b = train(&corpus, &corpus, &config).unwrap().checkpoint.to_json().unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bad_checkpoints_rejected() {
        assert!(matches!(Checkpoint::from_json("{}"), Err(Error::Checkpoint(_))));
        assert!(Checkpoint::from_json("not json").is_err());
    }

    #[test]
    fn empty_corpora_rejected() {
        assert!(matches!(
            train(&[], &[], &TrainConfig::feature_preset()),
            Err(Error::EmptyCorpus)
        ));
    }
}
