//! Training-set construction under the blind and sighted regimes, and the
//! SGD/AdaGrad loop with early stopping on dev macro-F1.

mod adagrad;
mod config;

pub use adagrad::{adagrad_update, AdagradState};
pub use config::{Negatives, Regime, TrainConfig};

use std::fmt::{self, Write as _};
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{AlignedInstance, Direction, LabelSet, LexFeatures};
use crate::deppath::{read_path_file, reverse_path, NodeSequence};
use crate::embeddings::{build_vocab, indexify, init_embeddings, Coverage, Vocab, PAD};
use crate::error::{Error, Result};
use crate::infer_eval::{forward_path, predict_with, prepare_eval, score_predictions, EvalInstance, ScoreReport};
use crate::model::Model;
use crate::network::{backward, cross_entropy, forward, regularization, NetworkParams, TargetDistribution};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Provenance {
    Gold,
    NegReversed,
    NegPool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledInstance<T> {
    pub id: u64,
    pub indices: Vec<usize>,
    pub lexfeat: Option<Vec<T>>,
    pub target: TargetDistribution<T>,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainingSet<T> {
    pub instances: Vec<LabeledInstance<T>>,
    pub vocab: Vocab,
    /// Number of output classes.
    pub k: usize,
    /// Lexical feature length, 0 when unused.
    pub f: usize,
    /// Gold instances dropped because no path could be extracted.
    pub skipped: usize,
}

impl<T> TrainingSet<T> {
    pub fn count(&self, provenance: Provenance) -> usize {
        self.instances.iter().filter(|i| i.provenance == provenance).count()
    }
}

struct Pending<T> {
    id: u64,
    path: NodeSequence,
    lexfeat: Option<Vec<T>>,
    class: usize,
    provenance: Provenance,
}

/// Builds the labeled instances for `config.regime`, with the vocabulary of
/// every node that occurs in them.
pub fn build_training_set<T: Scalar>(
    instances: &[AlignedInstance],
    config: &TrainConfig,
    labels: &LabelSet,
    lex: Option<&LexFeatures>,
) -> Result<TrainingSet<T>> {
    let negatives = config.negatives()?;
    let scheme = config.regime.scheme();
    let k = labels.num_classes(scheme);
    let f = lex.map_or(0, LexFeatures::dim);
    let mut pending = Vec::new();
    let mut skipped = 0;
    for inst in instances {
        labels.validate(&inst.raw.label)?;
        let fwd = match forward_path(inst, config.mode) {
            Ok(p) => p,
            Err(e) => {
                log::warn!("instance {}: {e}; skipped", inst.raw.id);
                skipped += 1;
                continue;
            }
        };
        let lexfeat: Option<Vec<T>> = lex
            .map(|l| l.get(inst.raw.id).map(|v| v.iter().map(|&x| T::of(x)).collect()))
            .transpose()?;
        let label = &inst.raw.label;
        let path = match (config.regime, label.direction()) {
            (Regime::Blind2K1, _) | (_, None | Some(Direction::E1ToE2)) => fwd,
            (_, Some(Direction::E2ToE1)) => reverse_path(&fwd),
        };
        let negative = (negatives == Negatives::Reversed && !label.is_other()).then(|| Pending {
            id: inst.raw.id,
            path: reverse_path(&path),
            lexfeat: lexfeat.clone(),
            class: 0,
            provenance: Provenance::NegReversed,
        });
        pending.push(Pending {
            id: inst.raw.id,
            path,
            lexfeat,
            class: labels.class_of(label, scheme)?,
            provenance: Provenance::Gold,
        });
        pending.extend(negative);
    }
    if skipped > 0 {
        log::warn!("{skipped} of {} training instances have no path", instances.len());
    }
    if let Negatives::Pool(pool) = &negatives {
        for (id, path) in read_path_file(pool)? {
            pending.push(Pending {
                id,
                path,
                lexfeat: (f > 0).then(|| vec![T::zero(); f]),
                class: 0,
                provenance: Provenance::NegPool,
            });
        }
    }
    let vocab = build_vocab(pending.iter().map(|p| &p.path), config.min_count);
    let instances = pending
        .into_iter()
        .map(|p| LabeledInstance {
            id: p.id,
            indices: indexify(&p.path, &vocab),
            lexfeat: p.lexfeat,
            target: TargetDistribution::one_hot(k, p.class),
            provenance: p.provenance,
        })
        .collect();
    Ok(TrainingSet {
        instances,
        vocab,
        k,
        f,
        skipped,
    })
}

/// SplitMix64 step, used to derive independent seeds from one config seed.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const STREAM_EMBEDDINGS: u64 = 1;
const STREAM_WEIGHTS: u64 = 2;
const STREAM_SHUFFLE: u64 = 3;

/// Visit order for one epoch; depends only on `(seed, epoch, n)`.
pub fn epoch_permutation(seed: u64, epoch: usize, n: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, STREAM_SHUFFLE));
    rng.set_stream(epoch as u64);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    order
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean cross-entropy over the epoch plus the regularizer at its end.
    pub mean_loss: f64,
    pub dev_f1: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct History {
    pub epochs: Vec<EpochRecord>,
    /// Epoch whose parameters were kept.
    pub best_epoch: usize,
}

impl History {
    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_string()).map_err(|e| Error::io(path, e))
    }
}

impl fmt::Display for History {
    /// `epoch<TAB>mean_loss<TAB>dev_f1`, with `-` when there is no dev set.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.epochs {
            let mut dev = String::new();
            match e.dev_f1 {
                Some(v) => write!(dev, "{v:.6}")?,
                None => dev.push('-'),
            }
            writeln!(f, "{}\t{:.8}\t{dev}", e.epoch, e.mean_loss)?;
        }
        Ok(())
    }
}

/// Runs SGD with AdaGrad from `params`. With a non-empty dev set the
/// parameters of the best dev epoch are returned and training stops after
/// `patience` epochs without improvement; otherwise all `max_epochs` run and
/// the last parameters are returned.
pub fn train<T: Scalar>(
    config: &TrainConfig,
    labels: &LabelSet,
    set: &TrainingSet<T>,
    mut params: NetworkParams<T>,
    dev: &[EvalInstance<T>],
) -> Result<(NetworkParams<T>, History)> {
    config.validate()?;
    if set.instances.is_empty() {
        return Err(Error::Config("training set is empty".into()));
    }
    let hp = config.hyperparams(set.k, set.f);
    params.check_shapes(&hp)?;
    let strategy = config.strategy();
    let lr = T::of(config.learning_rate);
    let eps = T::of(config.epsilon);
    let mut state = AdagradState::new(&params);
    let mut history = History::default();
    let mut best: Option<(f64, NetworkParams<T>)> = None;
    let mut stale = 0;

    for epoch in 1..=config.max_epochs {
        let mut loss_sum = 0.0;
        for i in epoch_permutation(config.seed, epoch, set.instances.len()) {
            let inst = &set.instances[i];
            let ctx = |e: Error| Error::Training {
                epoch,
                id: inst.id,
                source: Box::new(e),
            };
            let (probs, cache) = forward(&params, &hp, &inst.indices, inst.lexfeat.as_deref()).map_err(ctx)?;
            loss_sum += cross_entropy(&probs, &inst.target).as_f64();
            let mut grads = backward(&cache, &inst.target, &params, &hp).map_err(ctx)?;
            if !config.train_pad {
                grads.we.remove(&PAD);
            }
            adagrad_update(&mut params, &grads, &mut state, lr, eps);
        }
        let mean_loss = loss_sum / set.instances.len() as f64 + regularization(&params, &hp).as_f64();
        if !mean_loss.is_finite() {
            return Err(Error::Numeric { layer: "loss" });
        }
        let dev_f1 = if dev.is_empty() {
            None
        } else {
            let preds = predict_with(&params, &hp, labels, strategy, dev)?;
            Some(score_predictions(dev, &preds, labels)?.macro_f1)
        };
        log::info!(
            "epoch {epoch}: loss {mean_loss:.6}, dev F1 {}",
            dev_f1.map_or("-".to_string(), |v| format!("{v:.4}"))
        );
        history.epochs.push(EpochRecord {
            epoch,
            mean_loss,
            dev_f1,
        });
        match dev_f1 {
            None => history.best_epoch = epoch,
            Some(f1) => {
                if best.as_ref().is_none_or(|(b, _)| f1 > *b) {
                    best = Some((f1, params.clone()));
                    history.best_epoch = epoch;
                    stale = 0;
                } else {
                    stale += 1;
                    if stale >= config.patience {
                        break;
                    }
                }
            }
        }
    }
    let params = best.map_or(params, |(_, p)| p);
    Ok((params, history))
}

/// Everything produced by [`fit`].
#[derive(Clone, Debug)]
pub struct FitOutcome<T> {
    pub model: Model<T>,
    pub history: History,
    /// The trained model applied to the gold training instances.
    pub train_report: ScoreReport,
    pub coverage: Coverage,
    pub set_sizes: SetSizes,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SetSizes {
    pub gold: usize,
    pub reversed: usize,
    pub pool: usize,
    pub skipped: usize,
}

/// Builds the training set, initializes the network, trains, and scores the
/// result on the training data.
pub fn fit<T: Scalar>(
    config: &TrainConfig,
    labels: &LabelSet,
    train_data: &[AlignedInstance],
    dev_data: &[AlignedInstance],
    lex: Option<&LexFeatures>,
) -> Result<FitOutcome<T>> {
    config.validate()?;
    let set = build_training_set::<T>(train_data, config, labels, lex)?;
    let set_sizes = SetSizes {
        gold: set.count(Provenance::Gold),
        reversed: set.count(Provenance::NegReversed),
        pool: set.count(Provenance::NegPool),
        skipped: set.skipped,
    };
    let hp = config.hyperparams(set.k, set.f);
    let (we, coverage) = init_embeddings::<T>(
        &set.vocab,
        config.embeddings_path.as_deref(),
        config.d,
        derive_seed(config.seed, STREAM_EMBEDDINGS),
    )?;
    let params = NetworkParams::init(&hp, we, derive_seed(config.seed, STREAM_WEIGHTS))?;
    let dev = prepare_eval::<T>(dev_data, &set.vocab, config.mode, lex)?;
    let (params, history) = train(config, labels, &set, params, &dev)?;

    let model = Model {
        regime: config.regime,
        strategy: config.strategy(),
        mode: config.mode,
        labels: labels.clone(),
        vocab: set.vocab,
        hp,
        params,
    };
    let train_eval = prepare_eval::<T>(train_data, &model.vocab, model.mode, lex)?;
    let preds = predict_with(&model.params, &model.hp, labels, model.strategy, &train_eval)?;
    let train_report = score_predictions(&train_eval, &preds, labels)?;
    Ok(FitOutcome {
        model,
        history,
        train_report,
        coverage,
        set_sizes,
    })
}
