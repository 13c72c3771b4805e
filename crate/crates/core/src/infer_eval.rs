//! Inference under the three test strategies and direction-aware macro-F1.

use std::collections::{BTreeMap, HashSet};
use std::fmt::{self, Write as _};
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::corpus::{AlignedInstance, ClassScheme, DirectedLabel, Direction, LabelSet, LexFeatures};
use crate::deppath::{anchors, extract, reverse_path, NodeSequence, PathMode};
use crate::embeddings::{indexify, Vocab};
use crate::error::{Error, Result};
use crate::linalg::argmax;
use crate::model::Model;
use crate::network::{forward, Hyperparams, NetworkParams};
use crate::scalar::Scalar;

/// How a trained network is applied at test time.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EvalStrategy {
    /// Directed argmax over `2R+1` classes on the e1→e2 path.
    Blind,
    /// Undirected argmax on the gold subject→object path.
    Sighted,
    /// Both paths through an undirected model, merged by [`combine`].
    Dual,
}

impl EvalStrategy {
    pub fn scheme(self) -> ClassScheme {
        match self {
            EvalStrategy::Blind => ClassScheme::Directed,
            EvalStrategy::Sighted | EvalStrategy::Dual => ClassScheme::Undirected,
        }
    }
}

impl fmt::Display for EvalStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EvalStrategy::Blind => "blind",
            EvalStrategy::Sighted => "sighted",
            EvalStrategy::Dual => "dual",
        })
    }
}

impl FromStr for EvalStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "blind" | "blind_2k1" => Ok(EvalStrategy::Blind),
            "sighted" => Ok(EvalStrategy::Sighted),
            "dual" | "both" => Ok(EvalStrategy::Dual),
            _ => Err(Error::Config(format!("unknown test strategy {s:?}"))),
        }
    }
}

/// Encoded e1→e2 path of an aligned instance.
pub fn forward_path(inst: &AlignedInstance, mode: PathMode) -> Result<NodeSequence> {
    let (a1, a2) = anchors(&inst.parse, inst.raw.e1, inst.raw.e2);
    extract(&inst.parse, a1, a2, mode)
}

/// A test instance with both path directions indexified. `fwd` and `rev`
/// are `None` when no path could be extracted.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalInstance<T> {
    pub id: u64,
    pub gold: DirectedLabel,
    pub fwd: Option<Vec<usize>>,
    pub rev: Option<Vec<usize>>,
    pub lexfeat: Option<Vec<T>>,
}

pub fn prepare_eval<T: Scalar>(
    instances: &[AlignedInstance],
    vocab: &Vocab,
    mode: PathMode,
    lex: Option<&LexFeatures>,
) -> Result<Vec<EvalInstance<T>>> {
    instances
        .iter()
        .map(|inst| {
            let paths = match forward_path(inst, mode) {
                Ok(p) => Some((indexify(&p, vocab), indexify(&reverse_path(&p), vocab))),
                Err(e) => {
                    log::warn!("instance {}: {e}; predicting Other", inst.raw.id);
                    None
                }
            };
            let lexfeat = lex
                .map(|l| l.get(inst.raw.id).map(|v| v.iter().map(|&x| T::of(x)).collect()))
                .transpose()?;
            let (fwd, rev) = paths.unzip();
            Ok(EvalInstance {
                id: inst.raw.id,
                gold: inst.raw.label.clone(),
                fwd,
                rev,
                lexfeat,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prediction<T> {
    pub id: u64,
    /// Distribution for the e1→e2 path; empty if that path was not scored.
    pub fwd_probs: Vec<T>,
    /// Distribution for the e2→e1 path; empty if that path was not scored.
    pub rev_probs: Vec<T>,
    pub label: DirectedLabel,
    pub confidence: T,
    /// No path could be extracted.
    pub skipped: bool,
}

/// Merges the two directions of an undirected model: Other iff both argmaxes
/// are Other, else the most probable non-Other class over both directions.
pub fn combine<T: Scalar>(fwd: &[T], rev: &[T], labels: &LabelSet) -> Result<(DirectedLabel, T)> {
    let k = labels.num_classes(ClassScheme::Undirected);
    if fwd.len() != k || rev.len() != k {
        return Err(Error::Dimension(format!(
            "combine expects {k} classes, got {} and {}",
            fwd.len(),
            rev.len()
        )));
    }
    if argmax(fwd) == 0 && argmax(rev) == 0 {
        return Ok((DirectedLabel::Other, fwd[0].max(rev[0])));
    }
    let mut best = (1, Direction::E1ToE2, fwd[1]);
    for (dir, probs) in [(Direction::E1ToE2, fwd), (Direction::E2ToE1, rev)] {
        for (c, &p) in probs.iter().enumerate().skip(1) {
            if p > best.2 {
                best = (c, dir, p);
            }
        }
    }
    Ok((labels.undirected_label(best.0, best.1), best.2))
}

fn predict_one<T: Scalar>(
    params: &NetworkParams<T>,
    hp: &Hyperparams,
    labels: &LabelSet,
    strategy: EvalStrategy,
    inst: &EvalInstance<T>,
) -> Result<Prediction<T>> {
    let (Some(fwd), Some(rev)) = (&inst.fwd, &inst.rev) else {
        return Ok(Prediction {
            id: inst.id,
            fwd_probs: Vec::new(),
            rev_probs: Vec::new(),
            label: DirectedLabel::Other,
            confidence: T::zero(),
            skipped: true,
        });
    };
    let lex = inst.lexfeat.as_deref();
    let run = |indices: &[usize]| forward(params, hp, indices, lex).map(|(p, _)| p);
    let mut out = Prediction {
        id: inst.id,
        fwd_probs: Vec::new(),
        rev_probs: Vec::new(),
        label: DirectedLabel::Other,
        confidence: T::zero(),
        skipped: false,
    };
    match strategy {
        EvalStrategy::Blind => {
            out.fwd_probs = run(fwd)?;
            let c = argmax(&out.fwd_probs);
            out.label = labels.directed_label(c);
            out.confidence = out.fwd_probs[c];
        }
        EvalStrategy::Sighted => {
            let direction = inst.gold.direction().unwrap_or(Direction::E1ToE2);
            let probs = match direction {
                Direction::E1ToE2 => &mut out.fwd_probs,
                Direction::E2ToE1 => &mut out.rev_probs,
            };
            *probs = run(if direction == Direction::E1ToE2 { fwd } else { rev })?;
            let c = argmax(probs);
            out.confidence = probs[c];
            out.label = labels.undirected_label(c, direction);
        }
        EvalStrategy::Dual => {
            out.fwd_probs = run(fwd)?;
            out.rev_probs = run(rev)?;
            (out.label, out.confidence) = combine(&out.fwd_probs, &out.rev_probs, labels)?;
        }
    }
    Ok(out)
}

/// Predicts every instance in parallel; output order follows the input.
pub fn predict_with<T: Scalar>(
    params: &NetworkParams<T>,
    hp: &Hyperparams,
    labels: &LabelSet,
    strategy: EvalStrategy,
    instances: &[EvalInstance<T>],
) -> Result<Vec<Prediction<T>>> {
    let k = labels.num_classes(strategy.scheme());
    if hp.k != k {
        return Err(Error::Dimension(format!(
            "test strategy {strategy} needs {k} classes but the network has {}",
            hp.k
        )));
    }
    instances
        .par_iter()
        .map(|inst| predict_one(params, hp, labels, strategy, inst))
        .collect()
}

pub fn predict_corpus<T: Scalar>(
    model: &Model<T>,
    instances: &[EvalInstance<T>],
    strategy: EvalStrategy,
) -> Result<Vec<Prediction<T>>> {
    predict_with(&model.params, &model.hp, &model.labels, strategy, instances)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RelationScore {
    pub name: String,
    pub gold: usize,
    pub predicted: usize,
    pub correct: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl RelationScore {
    /// Whether the relation takes part in the macro average.
    pub fn counted(&self) -> bool {
        self.gold + self.predicted > 0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScoreReport {
    pub relations: Vec<RelationScore>,
    pub macro_f1: f64,
    /// Exact directed-label agreement over all instances, Other included.
    pub accuracy: f64,
    pub total: usize,
    /// `confusion[gold][pred]`, indexed by the directed class codec.
    pub confusion: Vec<Vec<usize>>,
    /// Instances predicted Other because no path was found.
    pub skipped: usize,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Direction-aware macro-F1 over the relations of `labels`. A relation with
/// neither gold nor predicted instances is left out of the mean.
pub fn macro_f1(gold: &[DirectedLabel], pred: &[DirectedLabel], labels: &LabelSet) -> Result<ScoreReport> {
    if gold.len() != pred.len() {
        return Err(Error::Dimension(format!(
            "{} gold labels but {} predictions",
            gold.len(),
            pred.len()
        )));
    }
    let k = labels.num_classes(ClassScheme::Directed);
    let mut confusion = vec![vec![0usize; k]; k];
    for (g, p) in gold.iter().zip(pred) {
        let gi = labels.class_of(g, ClassScheme::Directed)?;
        let pi = labels.class_of(p, ClassScheme::Directed)?;
        confusion[gi][pi] += 1;
    }
    let relations: Vec<RelationScore> = labels
        .relations()
        .iter()
        .enumerate()
        .map(|(r, name)| {
            let classes = [1 + 2 * r, 2 + 2 * r];
            let gold_n: usize = classes.iter().map(|&c| confusion[c].iter().sum::<usize>()).sum();
            let pred_n: usize = classes.iter().map(|&c| confusion.iter().map(|row| row[c]).sum::<usize>()).sum();
            let correct: usize = classes.iter().map(|&c| confusion[c][c]).sum();
            let precision = ratio(correct, pred_n);
            let recall = ratio(correct, gold_n);
            let f1 = if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                0.0
            };
            RelationScore {
                name: name.clone(),
                gold: gold_n,
                predicted: pred_n,
                correct,
                precision,
                recall,
                f1,
            }
        })
        .collect();
    let counted: Vec<f64> = relations.iter().filter(|r| r.counted()).map(|r| r.f1).collect();
    let macro_f1 = if counted.is_empty() {
        0.0
    } else {
        counted.iter().sum::<f64>() / counted.len() as f64
    };
    let agree: usize = (0..k).map(|c| confusion[c][c]).sum();
    Ok(ScoreReport {
        relations,
        macro_f1,
        accuracy: ratio(agree, gold.len()),
        total: gold.len(),
        confusion,
        skipped: 0,
    })
}

/// Scores predictions against the instances they were made for.
pub fn score_predictions<T>(
    instances: &[EvalInstance<T>],
    predictions: &[Prediction<T>],
    labels: &LabelSet,
) -> Result<ScoreReport> {
    let gold: Vec<_> = instances.iter().map(|i| i.gold.clone()).collect();
    let pred: Vec<_> = predictions.iter().map(|p| p.label.clone()).collect();
    let mut report = macro_f1(&gold, &pred, labels)?;
    report.skipped = predictions.iter().filter(|p| p.skipped).count();
    Ok(report)
}

/// Scores two id-keyed label lists; both must cover the same ids.
pub fn score_by_id(
    gold: &[(u64, DirectedLabel)],
    pred: &[(u64, DirectedLabel)],
    labels: &LabelSet,
) -> Result<ScoreReport> {
    let pred_map: BTreeMap<u64, &DirectedLabel> = pred.iter().map(|(id, l)| (*id, l)).collect();
    if pred_map.len() != pred.len() {
        return Err(Error::Format("duplicate id in predictions".into()));
    }
    let mut g = Vec::with_capacity(gold.len());
    let mut p = Vec::with_capacity(gold.len());
    for (id, label) in gold {
        let predicted = pred_map
            .get(id)
            .ok_or_else(|| Error::Format(format!("no prediction for instance {id}")))?;
        g.push(label.clone());
        p.push((*predicted).clone());
    }
    if gold.len() != pred.len() {
        let gold_ids: HashSet<u64> = gold.iter().map(|(id, _)| *id).collect();
        let extra = pred.iter().find(|(id, _)| !gold_ids.contains(id)).map_or(0, |(id, _)| *id);
        return Err(Error::Format(format!("prediction for unknown instance {extra}")));
    }
    macro_f1(&g, &p, labels)
}

impl ScoreReport {
    /// `key<TAB>value` lines.
    pub fn key_values(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "macro_f1\t{:.6}", self.macro_f1);
        let _ = writeln!(out, "accuracy\t{:.6}", self.accuracy);
        let _ = writeln!(out, "instances\t{}", self.total);
        let _ = writeln!(out, "skipped\t{}", self.skipped);
        for r in &self.relations {
            let _ = writeln!(out, "precision.{}\t{:.6}", r.name, r.precision);
            let _ = writeln!(out, "recall.{}\t{:.6}", r.name, r.recall);
            let _ = writeln!(out, "f1.{}\t{:.6}", r.name, r.f1);
        }
        out
    }
}

impl fmt::Display for ScoreReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.relations.iter().map(|r| r.name.len()).max().unwrap_or(8).max(8);
        writeln!(
            f,
            "{:<width$}  {:>6}  {:>6}  {:>6}  {:>9}  {:>6}  {:>6}",
            "relation", "gold", "pred", "tp", "precision", "recall", "f1"
        )?;
        for r in &self.relations {
            let mark = if r.counted() { "" } else { "  (excluded)" };
            writeln!(
                f,
                "{:<width$}  {:>6}  {:>6}  {:>6}  {:>9.4}  {:>6.4}  {:>6.4}{mark}",
                r.name, r.gold, r.predicted, r.correct, r.precision, r.recall, r.f1
            )?;
        }
        writeln!(f, "{:<width$}  {:>6.4}", "macro-F1", self.macro_f1)?;
        writeln!(f, "{:<width$}  {:>6.4}", "accuracy", self.accuracy)?;
        writeln!(f)?;
        f.write_str(&self.key_values())
    }
}

/// `ID<TAB>label` lines in ascending id order.
pub fn format_predictions(predictions: &[(u64, DirectedLabel)]) -> String {
    let mut sorted: Vec<_> = predictions.iter().collect();
    sorted.sort_by_key(|(id, _)| *id);
    let mut out = String::new();
    for (id, label) in sorted {
        let _ = writeln!(out, "{id}\t{label}");
    }
    out
}

pub fn write_predictions<T>(predictions: &[Prediction<T>], path: &Path) -> Result<()> {
    let pairs: Vec<_> = predictions.iter().map(|p| (p.id, p.label.clone())).collect();
    fs::write(path, format_predictions(&pairs)).map_err(|e| Error::io(path, e))
}

/// Reads `ID<TAB>label` lines. Also accepts the SemEval answer-key layout.
pub fn parse_predictions(text: &str) -> Result<Vec<(u64, DirectedLabel)>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let err = |m: String| Error::Format(format!("predictions line {}: {m}", i + 1));
        let (id, label) = line
            .split_once(char::is_whitespace)
            .ok_or_else(|| err("expected `ID<TAB>label`".into()))?;
        let id: u64 = id.parse().map_err(|_| err(format!("bad id {id:?}")))?;
        let label: DirectedLabel = label.trim().parse().map_err(|e| err(format!("{e}")))?;
        if !seen.insert(id) {
            return Err(err(format!("duplicate id {id}")));
        }
        out.push((id, label));
    }
    Ok(out)
}

pub fn read_predictions(path: &Path) -> Result<Vec<(u64, DirectedLabel)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_predictions(&text)
}
