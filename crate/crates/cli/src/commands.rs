use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use charparse::bench::bench;
use charparse::parse::{parse_all, parse_scores, sentence_chars, Parsed};
use charparse::scoring::read_score_file;
use charparse::synthetic::{generate, SynthConfig};
use charparse::trainer::train;
use charparse::{
    from_char_tree, joint_report, parse_bracketed, to_char_tree, CharTree, Checkpoint, Corpus, DecodeConfig,
    TrainConfig,
};
use rayon::prelude::*;

use crate::{
    BenchArgs, Cli, Command, DecodeFlags, DetransformArgs, EvalArgs, Failure, InputFormat, ParseArgs, Preset,
    SynthArgs, TrainArgs, TransformArgs,
};

type CmdResult = Result<(), Failure>;

fn require_input(path: &Path) -> CmdResult {
    if !path.is_file() {
        return Err(Failure::Usage(format!("input file {} does not exist", path.display())));
    }
    Ok(())
}

fn require_output(path: &Option<PathBuf>) -> CmdResult {
    if let Some(path) = path {
        let parent = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        if !parent.is_dir() {
            return Err(Failure::Usage(format!("output directory {} does not exist", parent.display())));
        }
        if path.is_dir() {
            return Err(Failure::Usage(format!("output {} is a directory", path.display())));
        }
    }
    Ok(())
}

/// Writes `text` to `path`, or to stdout when no path is given.
fn emit(path: &Option<PathBuf>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = BufWriter::new(io::stdout().lock());
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn read_corpus(path: &Path, keep_function_tags: bool) -> anyhow::Result<Corpus> {
    Corpus::read(path, !keep_function_tags).with_context(|| format!("reading {}", path.display()))
}

fn read_sentences(path: &Path) -> anyhow::Result<Vec<Vec<char>>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.lines()
        .enumerate()
        .map(|(k, line)| {
            let chars = sentence_chars(line);
            if chars.is_empty() {
                bail!("{}: line {}: empty sentence", path.display(), k + 1);
            }
            Ok(chars)
        })
        .collect()
}

fn decode_config(flags: DecodeFlags) -> DecodeConfig {
    DecodeConfig {
        constrain_char_labels: !flags.no_char_constraints,
        require_nonnull_root: !flags.allow_null_root,
    }
}

pub fn run(cli: Cli) -> CmdResult {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(|e| Failure::Usage(format!("cannot start {} threads: {e}", cli.threads)))?;
    pool.install(|| match cli.command {
        Command::Transform(a) => transform(a),
        Command::Detransform(a) => detransform(a),
        Command::Train(a) => train_cmd(a),
        Command::Parse(a) => parse(a),
        Command::Eval(a) => eval(a),
        Command::Bench(a) => bench_cmd(a),
        Command::Synth(a) => synth(a),
    })
}

fn transform(a: TransformArgs) -> CmdResult {
    require_input(&a.input)?;
    require_output(&a.output)?;
    let corpus = read_corpus(&a.input, a.keep_function_tags)?;
    let mut out = String::new();
    for (k, tree) in corpus.trees.iter().enumerate() {
        let ct = to_char_tree(tree).with_context(|| format!("{}: tree {}", a.input.display(), k + 1))?;
        out.push_str(&ct.to_string());
        out.push('\n');
    }
    log::info!("transformed {} trees", corpus.len());
    Ok(emit(&a.output, &out)?)
}

fn detransform(a: DetransformArgs) -> CmdResult {
    require_input(&a.input)?;
    require_output(&a.output)?;
    require_output(&a.segmentation)?;
    let text = fs::read_to_string(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let corpus = parse_bracketed(&text).with_context(|| format!("reading {}", a.input.display()))?;
    let mut trees = String::new();
    let mut segs = String::new();
    for (k, t) in corpus.trees.iter().enumerate() {
        let ct = CharTree::from_syntax_tree(t).with_context(|| format!("{}: tree {}", a.input.display(), k + 1))?;
        let (tree, seg) = from_char_tree(&ct);
        trees.push_str(&tree.to_string());
        trees.push('\n');
        segs.push_str(&seg.to_line());
        segs.push('\n');
    }
    emit(&a.output, &trees)?;
    if a.segmentation.is_some() {
        emit(&a.segmentation, &segs)?;
    }
    Ok(())
}

fn train_cmd(a: TrainArgs) -> CmdResult {
    require_input(&a.train)?;
    require_input(&a.dev)?;
    if let Some(c) = &a.config {
        require_input(c)?;
    }
    require_output(&Some(a.output.clone()))?;
    let mut config = match a.preset {
        Preset::Feature => TrainConfig::feature_preset(),
        Preset::Mlp => TrainConfig::default(),
    };
    if let Some(path) = &a.config {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        config
            .apply_key_values(&text)
            .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    }
    for kv in &a.overrides {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        config.set(k.trim(), v.trim()).map_err(|e| Failure::Usage(e.to_string()))?;
    }
    if let Some(seed) = a.seed {
        config.seed = seed;
    }
    config.validate().map_err(|e| Failure::Usage(e.to_string()))?;

    let train_corpus = read_corpus(&a.train, a.keep_function_tags)?;
    let dev_corpus = read_corpus(&a.dev, a.keep_function_tags)?;
    log::info!(
        "training {:?} scorer on {} sentences, dev {}",
        config.scorer,
        train_corpus.len(),
        dev_corpus.len()
    );
    let outcome = train(&train_corpus.trees, &dev_corpus.trees, &config)?;
    outcome
        .checkpoint
        .save(&a.output)
        .with_context(|| format!("writing {}", a.output.display()))?;
    log::info!(
        "best dev parse F1 {:.4} at epoch {} after {} epochs; wrote {}",
        outcome.checkpoint.best_dev_f1,
        outcome.checkpoint.epoch,
        outcome.history.len(),
        a.output.display()
    );
    Ok(())
}

fn parse(a: ParseArgs) -> CmdResult {
    require_input(&a.input)?;
    if let Some(p) = a.checkpoint.as_ref().or(a.scores.as_ref()) {
        require_input(p)?;
    }
    require_output(&a.output)?;
    require_output(&a.segmentation)?;
    let sentences = read_sentences(&a.input)?;
    let config = decode_config(a.decode);

    let parsed: Vec<Parsed> = if let Some(path) = &a.checkpoint {
        let ckpt = Checkpoint::load(path).with_context(|| format!("loading {}", path.display()))?;
        parse_all(&ckpt.scorer, &ckpt.vocab, &sentences, &config)?
    } else {
        let path = a.scores.as_ref().expect("clap requires a model");
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let blocks = read_score_file(&text).with_context(|| format!("reading {}", path.display()))?;
        if blocks.len() != sentences.len() {
            return Err(anyhow!(
                "{} has {} score blocks for {} input sentences",
                path.display(),
                blocks.len(),
                sentences.len()
            )
            .into());
        }
        blocks
            .par_iter()
            .zip(&sentences)
            .enumerate()
            .map(|(k, (block, chars))| {
                if block.scores.n() != chars.len() {
                    bail!(
                        "sentence {} ({}): scores cover {} characters, input has {}",
                        k + 1,
                        block.id,
                        block.scores.n(),
                        chars.len()
                    );
                }
                Ok(parse_scores(&block.scores, &block.vocab, chars, &config)?)
            })
            .collect::<anyhow::Result<_>>()?
    };

    let mut trees = String::new();
    let mut segs = String::new();
    for p in &parsed {
        trees.push_str(&p.tree.to_string());
        trees.push('\n');
        segs.push_str(&p.segmentation.to_line());
        segs.push('\n');
    }
    emit(&a.output, &trees)?;
    if a.segmentation.is_some() {
        emit(&a.segmentation, &segs)?;
    }
    log::info!("parsed {} sentences", parsed.len());
    Ok(())
}

fn eval(a: EvalArgs) -> CmdResult {
    require_input(&a.gold)?;
    require_input(&a.pred)?;
    let gold = read_corpus(&a.gold, a.keep_function_tags)?;
    let pred = read_corpus(&a.pred, a.keep_function_tags)?;
    let report = joint_report(&gold.trees, &pred.trees)?;
    let text = if a.key_values {
        report.to_key_values()
    } else {
        format!("{report}\n")
    };
    Ok(emit(&None, &text)?)
}

fn bench_cmd(a: BenchArgs) -> CmdResult {
    require_input(&a.checkpoint)?;
    require_input(&a.input)?;
    if a.repeats == 0 {
        return Err(Failure::Usage("--repeats must be positive".into()));
    }
    let ckpt = Checkpoint::load(&a.checkpoint).with_context(|| format!("loading {}", a.checkpoint.display()))?;
    let sentences = match a.format {
        InputFormat::Raw => read_sentences(&a.input)?,
        InputFormat::Trees => read_corpus(&a.input, true)?.trees.iter().map(|t| t.chars()).collect(),
    };
    let report = bench(
        &ckpt.scorer,
        &ckpt.vocab,
        &sentences,
        &ckpt.decode_config(),
        a.repeats,
        a.with_scoring,
    )?;
    let mut out = format!(
        "sentences={}\nrepeats={}\nthreads={}\ndecode_mean={:.3}\ndecode_std={:.3}\n",
        report.sentences,
        report.repeats,
        rayon::current_num_threads(),
        report.decode.mean,
        report.decode.std_dev
    );
    if let Some(e2e) = &report.end_to_end {
        out.push_str(&format!("end_to_end_mean={:.3}\nend_to_end_std={:.3}\n", e2e.mean, e2e.std_dev));
    }
    Ok(emit(&None, &out)?)
}

fn synth(a: SynthArgs) -> CmdResult {
    require_output(&a.output)?;
    let config = if a.ctb_like {
        SynthConfig::ctb_like(a.seed)
    } else {
        SynthConfig::small(a.seed)
    };
    let corpus = Corpus {
        trees: generate(a.count, &config),
        source_name: String::new(),
    };
    Ok(emit(&a.output, &corpus.to_bracketed())?)
}
