//! `sdprel` command-line entry point.
//!
//! Exit status: 0 on success, 1 on invalid input or usage, 2 on runtime
//! failure. Diagnostics go to stderr, results to stdout or the named files.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sdprel::corpus::{align_corpus, parse_semeval_file, read_conll, AlignedInstance, LabelSet, LexFeatures};
use sdprel::deppath::{format_path_file, PathMode};
use sdprel::infer_eval::{
    forward_path, parse_predictions, predict_corpus, prepare_eval, read_predictions, score_by_id, write_predictions,
    EvalStrategy,
};
use sdprel::network::grad_check;
use sdprel::training::{fit, TrainConfig};
use sdprel::{Error, Model, Result};

#[derive(Parser, Debug)]
#[command(name = "sdprel", version, about = "Relation classification over shortest dependency paths")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train a model and write it with its per-epoch history.
    Train(TrainArgs),
    /// Predict labels for an annotated, parsed corpus.
    Predict(PredictArgs),
    /// Score predictions against gold labels.
    Score(ScoreArgs),
    /// Write the encoded e1→e2 path of every instance.
    ExtractPaths(ExtractArgs),
    /// Compare analytic gradients with finite differences.
    Gradcheck(GradcheckArgs),
}

#[derive(Args, Debug)]
struct Corpus {
    /// SemEval-format annotation file.
    #[arg(long)]
    sem: PathBuf,
    /// CoNLL-X parses of the same sentences, in the same order.
    #[arg(long)]
    conll: PathBuf,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    train_sem: PathBuf,
    #[arg(long)]
    train_conll: PathBuf,
    #[arg(long)]
    dev_sem: PathBuf,
    #[arg(long)]
    dev_conll: PathBuf,
    /// Model output file.
    #[arg(long)]
    out: PathBuf,
    /// History output file; defaults to `<out>.history`.
    #[arg(long)]
    history: Option<PathBuf>,
    /// Override a config key, e.g. `--set n1=50`. Applied in order after the file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Overrides the config `seed`, after any `--set`.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    corpus: Corpus,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    lex_features: Option<PathBuf>,
    /// Test strategy; defaults to the one stored in the model.
    #[arg(long)]
    strategy: Option<EvalStrategy>,
}

#[derive(Args, Debug)]
struct ScoreArgs {
    /// Answer key (`ID<TAB>label`) or SemEval annotation file.
    #[arg(long)]
    gold: PathBuf,
    #[arg(long)]
    pred: PathBuf,
    /// Relation names, one per line; defaults to the nine SemEval relations.
    #[arg(long)]
    label_set: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExtractArgs {
    #[command(flatten)]
    corpus: Corpus,
    #[arg(long, default_value = "lcnn")]
    mode: PathMode,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct GradcheckArgs {
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

fn load_corpus(sem: &Path, conll: &Path) -> Result<Vec<AlignedInstance>> {
    align_corpus(parse_semeval_file(sem)?, read_conll(conll)?)
}

fn train(args: TrainArgs) -> Result<()> {
    let mut config = TrainConfig::from_file(&args.config)?;
    for o in &args.overrides {
        let (key, value) = o
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got {o:?}")))?;
        config.set(key.trim(), value.trim())?;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    config.validate()?;
    let labels = match &config.label_set_path {
        Some(p) => LabelSet::from_file(p)?,
        None => LabelSet::semeval(),
    };
    let lex = config.lex_features_path.as_deref().map(LexFeatures::from_file).transpose()?;
    let train_data = load_corpus(&args.train_sem, &args.train_conll)?;
    let dev_data = load_corpus(&args.dev_sem, &args.dev_conll)?;
    let outcome = fit::<f64>(&config, &labels, &train_data, &dev_data, lex.as_ref())?;

    outcome.model.save(&args.out)?;
    let history = args.history.unwrap_or_else(|| {
        let mut p = args.out.clone().into_os_string();
        p.push(".history");
        p.into()
    });
    outcome.history.write(&history)?;

    let s = outcome.set_sizes;
    eprintln!(
        "training set: {} gold, {} reversed negatives, {} pool negatives, {} skipped",
        s.gold, s.reversed, s.pool, s.skipped
    );
    eprintln!(
        "pretrained coverage: {} of {} word nodes",
        outcome.coverage.matched, outcome.coverage.words
    );
    println!("epochs\t{}", outcome.history.epochs.len());
    println!("best_epoch\t{}", outcome.history.best_epoch);
    println!("train_accuracy\t{:.6}", outcome.train_report.accuracy);
    println!("train_macro_f1\t{:.6}", outcome.train_report.macro_f1);
    Ok(())
}

fn predict(args: PredictArgs) -> Result<()> {
    let model = Model::load(&args.model)?;
    let lex = args.lex_features.as_deref().map(LexFeatures::from_file).transpose()?;
    if model.hp.f > 0 && lex.is_none() {
        return Err(Error::Config(format!(
            "model expects {} lexical features; pass --lex-features",
            model.hp.f
        )));
    }
    let strategy = args.strategy.unwrap_or(model.strategy);
    let data = load_corpus(&args.corpus.sem, &args.corpus.conll)?;
    let instances = prepare_eval::<f64>(&data, &model.vocab, model.mode, lex.as_ref())?;
    let predictions = predict_corpus(&model, &instances, strategy)?;
    write_predictions(&predictions, &args.out)?;
    let skipped = predictions.iter().filter(|p| p.skipped).count();
    eprintln!("{} predictions ({strategy}), {skipped} without a path", predictions.len());
    Ok(())
}

fn score(args: ScoreArgs) -> Result<()> {
    let labels = match &args.label_set {
        Some(p) => LabelSet::from_file(p)?,
        None => LabelSet::semeval(),
    };
    let text = std::fs::read_to_string(&args.gold).map_err(|e| Error::Io {
        path: args.gold.clone(),
        source: e,
    })?;
    let gold = match parse_predictions(&text) {
        Ok(key) => key,
        Err(_) => parse_semeval_file(&args.gold)?
            .into_iter()
            .map(|r| (r.id, r.label))
            .collect(),
    };
    let pred = read_predictions(&args.pred)?;
    let report = score_by_id(&gold, &pred, &labels)?;
    print!("{report}");
    Ok(())
}

fn extract_paths(args: ExtractArgs) -> Result<()> {
    let data = load_corpus(&args.corpus.sem, &args.corpus.conll)?;
    let mut paths = Vec::with_capacity(data.len());
    for inst in &data {
        match forward_path(inst, args.mode) {
            Ok(p) => paths.push((inst.raw.id, p)),
            Err(e) => eprintln!("instance {}: {e}", inst.raw.id),
        }
    }
    std::fs::write(&args.out, format_path_file(&paths)).map_err(|e| Error::Io {
        path: args.out.clone(),
        source: e,
    })?;
    eprintln!("{} of {} paths written", paths.len(), data.len());
    Ok(())
}

fn gradcheck(args: GradcheckArgs) -> Result<bool> {
    let report = grad_check(args.seed)?;
    print!("{report}");
    Ok(report.passed())
}

fn run(argv: impl IntoIterator<Item = String>) -> u8 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Train(a) => train(a).map(|_| true),
        Command::Predict(a) => predict(a).map(|_| true),
        Command::Score(a) => score(a).map(|_| true),
        Command::ExtractPaths(a) => extract_paths(a).map(|_| true),
        Command::Gradcheck(a) => gradcheck(a),
    };
    match result {
        Ok(true) => 0,
        Ok(false) => {
            eprintln!("gradient check failed");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                1
            } else {
                2
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    ExitCode::from(run(std::env::args()))
}
