//! Central finite-difference verification of [`backward`].

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{backward, forward, loss_j, Gradients, Hyperparams, Lambdas, NetworkParams, TargetDistribution};
use crate::embeddings::{EmbeddingTable, PAD};
use crate::error::Result;

pub const GRAD_CHECK_STEP: f64 = 1e-5;
pub const GRAD_CHECK_TOLERANCE: f64 = 1e-4;

/// Denominator floor for the relative error of near-zero gradients.
const REL_FLOOR: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Block {
    We,
    W1,
    B1,
    W2,
    B2,
    /// Columns of `W3` that weigh the hidden layer.
    W3,
    /// Columns of `W3` that weigh the lexical features.
    W3Lex,
    B3,
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Block::We => "We",
            Block::W1 => "W1",
            Block::B1 => "b1",
            Block::W2 => "W2",
            Block::B2 => "b2",
            Block::W3 => "W3",
            Block::W3Lex => "W3_lex",
            Block::B3 => "b3",
        })
    }
}

/// One random network to check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradCheckCase {
    pub hp: Hyperparams,
    pub vocab_size: usize,
    /// Path length in nodes.
    pub t: usize,
}

impl GradCheckCase {
    fn new(d: usize, w: usize, n1: usize, n2: usize, k: usize, f: usize, t: usize) -> Self {
        GradCheckCase {
            hp: Hyperparams {
                d,
                w,
                n1,
                n2,
                k,
                f,
                lambdas: Lambdas {
                    we: 1e-2,
                    w1: 2e-2,
                    w2: 1e-2,
                    w3: 3e-2,
                },
            },
            vocab_size: 9,
            t,
        }
    }

    /// Small configurations covering full padding (`t = 1`), windows wider
    /// than the path, identity windows, repeated nodes and lexical features.
    pub fn defaults() -> Vec<Self> {
        vec![
            Self::new(4, 3, 5, 4, 3, 0, 4),
            Self::new(4, 3, 5, 4, 3, 0, 1),
            Self::new(4, 3, 5, 4, 3, 3, 4),
            Self::new(3, 5, 4, 3, 4, 0, 2),
            Self::new(3, 1, 6, 3, 5, 2, 6),
            Self::new(2, 3, 6, 5, 3, 1, 9),
            Self::new(5, 3, 7, 4, 19, 2, 1),
        ]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CaseReport {
    pub case: GradCheckCase,
    /// Maximum relative error per parameter block.
    pub max_rel_error: Vec<(Block, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheckReport {
    pub tolerance: f64,
    pub cases: Vec<CaseReport>,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.failing_blocks().is_empty()
    }

    pub fn failing_blocks(&self) -> Vec<Block> {
        let mut out: Vec<Block> = self
            .cases
            .iter()
            .flat_map(|c| c.max_rel_error.iter())
            .filter(|(_, e)| !(*e <= self.tolerance))
            .map(|(b, _)| *b)
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// Largest relative error seen for `block` across all cases.
    pub fn max_error(&self, block: Block) -> Option<f64> {
        self.cases
            .iter()
            .flat_map(|c| c.max_rel_error.iter())
            .filter(|(b, _)| *b == block)
            .map(|(_, e)| *e)
            .reduce(f64::max)
    }
}

impl fmt::Display for GradCheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.cases.iter().enumerate() {
            let hp = &c.case.hp;
            writeln!(
                f,
                "case {i}: d={} w={} n1={} n2={} K={} f={} t={}",
                hp.d, hp.w, hp.n1, hp.n2, hp.k, hp.f, c.case.t
            )?;
            for (block, err) in &c.max_rel_error {
                let verdict = if *err <= self.tolerance { "ok" } else { "FAIL" };
                writeln!(f, "  {block:<7}{err:>12.3e}  {verdict}")?;
            }
        }
        write!(
            f,
            "{} (tolerance {:e})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.tolerance
        )
    }
}

pub fn grad_check(seed: u64) -> Result<GradCheckReport> {
    grad_check_with(seed, &GradCheckCase::defaults(), |_| {})
}

/// Runs the check over `cases`. `tamper` may alter the analytic gradients
/// before comparison (fault injection).
pub fn grad_check_with(
    seed: u64,
    cases: &[GradCheckCase],
    tamper: impl Fn(&mut Gradients<f64>),
) -> Result<GradCheckReport> {
    let mut reports = Vec::with_capacity(cases.len());
    for (n, case) in cases.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(n as u64);
        reports.push(check_case(case, &mut rng, &tamper)?);
    }
    Ok(GradCheckReport {
        tolerance: GRAD_CHECK_TOLERANCE,
        cases: reports,
    })
}

fn check_case(
    case: &GradCheckCase,
    rng: &mut ChaCha8Rng,
    tamper: &impl Fn(&mut Gradients<f64>),
) -> Result<CaseReport> {
    let hp = case.hp;
    let mut we_data: Vec<f64> = (0..hp.d * case.vocab_size).map(|_| rng.gen_range(-0.5..0.5)).collect();
    we_data[PAD * hp.d..(PAD + 1) * hp.d].fill(0.0);
    let we = EmbeddingTable::from_columns(hp.d, we_data)?;
    let mut params = NetworkParams::init(&hp, we, rng.gen())?;
    for b in params.b1.iter_mut().chain(&mut params.b2).chain(&mut params.b3) {
        *b = rng.gen_range(-0.1..0.1);
    }
    let indices: Vec<usize> = (0..case.t).map(|_| rng.gen_range(1..case.vocab_size)).collect();
    let lex: Vec<f64> = (0..hp.f).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let lexfeat = (hp.f > 0).then_some(lex.as_slice());
    let raw: Vec<f64> = (0..hp.k).map(|_| rng.gen_range(0.0..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let target = TargetDistribution::new(raw.iter().map(|v| v / total).collect())?;

    let (_, cache) = forward(&params, &hp, &indices, lexfeat)?;
    let mut grads = backward(&cache, &target, &params, &hp)?;
    tamper(&mut grads);

    let loss = |p: &NetworkParams<f64>| -> Result<f64> {
        let (probs, _) = forward(p, &hp, &indices, lexfeat)?;
        Ok(loss_j(&probs, &target, p, &hp))
    };
    let compare = |p: &mut NetworkParams<f64>, slot: fn(&mut NetworkParams<f64>, usize) -> &mut f64, i: usize, analytic: f64| -> Result<f64> {
        let orig = *slot(p, i);
        *slot(p, i) = orig + GRAD_CHECK_STEP;
        let plus = loss(p)?;
        *slot(p, i) = orig - GRAD_CHECK_STEP;
        let minus = loss(p)?;
        *slot(p, i) = orig;
        let numeric = (plus - minus) / (2.0 * GRAD_CHECK_STEP);
        Ok(rel_error(analytic, numeric))
    };

    let mut max_rel_error = Vec::new();
    let mut record = |block: Block, errs: Vec<f64>| {
        max_rel_error.push((block, errs.into_iter().fold(0.0, f64::max)));
    };

    let d = hp.d;
    let mut errs = Vec::new();
    for (&col, g) in &grads.we {
        for (r, &a) in g.iter().enumerate() {
            errs.push(compare(&mut params, |p, i| embedding_slot(p, i), col * d + r, a)?);
        }
    }
    record(Block::We, errs);

    let errs = (0..grads.w1.as_slice().len())
        .map(|i| compare(&mut params, |p, i| &mut p.w1.as_mut_slice()[i], i, grads.w1.as_slice()[i]))
        .collect::<Result<_>>()?;
    record(Block::W1, errs);
    let errs = (0..hp.n1)
        .map(|i| compare(&mut params, |p, i| &mut p.b1[i], i, grads.b1[i]))
        .collect::<Result<_>>()?;
    record(Block::B1, errs);
    let errs = (0..grads.w2.as_slice().len())
        .map(|i| compare(&mut params, |p, i| &mut p.w2.as_mut_slice()[i], i, grads.w2.as_slice()[i]))
        .collect::<Result<_>>()?;
    record(Block::W2, errs);
    let errs = (0..hp.n2)
        .map(|i| compare(&mut params, |p, i| &mut p.b2[i], i, grads.b2[i]))
        .collect::<Result<_>>()?;
    record(Block::B2, errs);

    let cols = hp.n2 + hp.f;
    let (mut hidden_errs, mut lex_errs) = (Vec::new(), Vec::new());
    for i in 0..grads.w3.as_slice().len() {
        let e = compare(&mut params, |p, i| &mut p.w3.as_mut_slice()[i], i, grads.w3.as_slice()[i])?;
        if i % cols < hp.n2 {
            hidden_errs.push(e);
        } else {
            lex_errs.push(e);
        }
    }
    record(Block::W3, hidden_errs);
    if hp.f > 0 {
        record(Block::W3Lex, lex_errs);
    }
    let errs = (0..hp.k)
        .map(|i| compare(&mut params, |p, i| &mut p.b3[i], i, grads.b3[i]))
        .collect::<Result<_>>()?;
    record(Block::B3, errs);

    Ok(CaseReport {
        case: *case,
        max_rel_error,
    })
}

fn embedding_slot(p: &mut NetworkParams<f64>, i: usize) -> &mut f64 {
    let d = p.we.dim();
    &mut p.we.column_mut(i / d)[i % d]
}

fn rel_error(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    (a - b).abs() / a.abs().max(b.abs()).max(REL_FLOOR)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_seed_passes() {
        let report = grad_check(7).unwrap();
        assert!(report.cases.len() >= 5);
        assert!(report.passed(), "{report}");
    }

    #[test]
    fn corrupted_w2_is_flagged() {
        let report = grad_check_with(7, &GradCheckCase::defaults(), |g| {
            for v in g.w2.as_mut_slice() {
                *v = *v * 1.01 + 1e-3;
            }
        })
        .unwrap();
        assert_eq!(report.failing_blocks(), [Block::W2]);
    }

    #[test]
    fn single_node_path_passes() {
        let case = GradCheckCase::defaults()[1];
        assert_eq!(case.t, 1);
        let report = grad_check_with(11, &[case], |_| {}).unwrap();
        assert!(report.passed(), "{report}");
    }
}
