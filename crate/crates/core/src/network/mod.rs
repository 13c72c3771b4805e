//! Convolutional network over encoded dependency paths.
//!
//! lookup → window concatenation → convolution (`W1`) → max pooling over
//! positions → `tanh(W2·p + b2)` → `softmax(W3·[h; lex] + b3)`.

mod gradcheck;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use gradcheck::{grad_check, grad_check_with, Block, CaseReport, GradCheckCase, GradCheckReport, GRAD_CHECK_STEP, GRAD_CHECK_TOLERANCE};

use crate::embeddings::{EmbeddingTable, PAD};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::scalar::Scalar;

/// Per-matrix L2 weights for `We`, `W1`, `W2`, `W3`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lambdas {
    pub we: f64,
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
}

impl Default for Lambdas {
    fn default() -> Self {
        Lambdas {
            we: 1e-4,
            w1: 1e-3,
            w2: 1e-4,
            w3: 2e-3,
        }
    }
}

impl Lambdas {
    pub const ZERO: Lambdas = Lambdas {
        we: 0.0,
        w1: 0.0,
        w2: 0.0,
        w3: 0.0,
    };
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hyperparams {
    /// Embedding dimension.
    pub d: usize,
    /// Window size, odd.
    pub w: usize,
    /// Convolution output size.
    pub n1: usize,
    /// Hidden layer size.
    pub n2: usize,
    /// Number of output classes.
    pub k: usize,
    /// Lexical feature length, 0 when unused.
    pub f: usize,
    pub lambdas: Lambdas,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            d: 50,
            w: 3,
            n1: 200,
            n2: 100,
            k: 10,
            f: 0,
            lambdas: Lambdas::default(),
        }
    }
}

impl Hyperparams {
    pub fn d_w(&self) -> usize {
        self.d * self.w
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.w == 0 || self.n1 == 0 || self.n2 == 0 || self.k == 0 {
            return Err(Error::Config(format!("layer sizes must be positive: {self:?}")));
        }
        if self.w.is_multiple_of(2) {
            return Err(Error::Config(format!("window size must be odd, got {}", self.w)));
        }
        let l = self.lambdas;
        if [l.we, l.w1, l.w2, l.w3].iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
            return Err(Error::Config(format!("regularization weights must be finite and non-negative: {l:?}")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NetworkParams<T> {
    pub we: EmbeddingTable<T>,
    pub w1: Matrix<T>,
    pub b1: Vec<T>,
    pub w2: Matrix<T>,
    pub b2: Vec<T>,
    /// `K × (n2 + f)`; the last `f` columns weigh the lexical features.
    pub w3: Matrix<T>,
    pub b3: Vec<T>,
}

impl<T: Scalar> NetworkParams<T> {
    /// Glorot-uniform weights, zero biases, and the given embedding table.
    pub fn init(hp: &Hyperparams, we: EmbeddingTable<T>, seed: u64) -> Result<Self> {
        hp.validate()?;
        if we.dim() != hp.d {
            return Err(Error::Dimension(format!("embedding dim {} but d = {}", we.dim(), hp.d)));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut glorot = |rows: usize, cols: usize| {
            let a = (6.0 / (rows + cols) as f64).sqrt();
            Matrix::from_fn(rows, cols, |_, _| T::of(rng.gen_range(-a..=a)))
        };
        let w1 = glorot(hp.n1, hp.d_w());
        let w2 = glorot(hp.n2, hp.n1);
        let w3 = glorot(hp.k, hp.n2 + hp.f);
        Ok(NetworkParams {
            we,
            w1,
            b1: vec![T::zero(); hp.n1],
            w2,
            b2: vec![T::zero(); hp.n2],
            w3,
            b3: vec![T::zero(); hp.k],
        })
    }

    /// All-zero parameters with `columns` embedding columns.
    pub fn zeros(hp: &Hyperparams, columns: usize) -> Self {
        NetworkParams {
            we: EmbeddingTable::zeros(hp.d, columns),
            w1: Matrix::zeros(hp.n1, hp.d_w()),
            b1: vec![T::zero(); hp.n1],
            w2: Matrix::zeros(hp.n2, hp.n1),
            b2: vec![T::zero(); hp.n2],
            w3: Matrix::zeros(hp.k, hp.n2 + hp.f),
            b3: vec![T::zero(); hp.k],
        }
    }

    pub fn check_shapes(&self, hp: &Hyperparams) -> Result<()> {
        let ok = self.we.dim() == hp.d
            && self.w1.shape() == (hp.n1, hp.d_w())
            && self.b1.len() == hp.n1
            && self.w2.shape() == (hp.n2, hp.n1)
            && self.b2.len() == hp.n2
            && self.w3.shape() == (hp.k, hp.n2 + hp.f)
            && self.b3.len() == hp.k;
        if ok {
            Ok(())
        } else {
            Err(Error::Dimension(format!("parameter shapes do not match {hp:?}")))
        }
    }

    pub fn all_finite(&self) -> bool {
        self.we.all_finite()
            && self.w1.all_finite()
            && self.w2.all_finite()
            && self.w3.all_finite()
            && linalg::all_finite(&self.b1)
            && linalg::all_finite(&self.b2)
            && linalg::all_finite(&self.b3)
    }
}

/// Target class distribution `t(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TargetDistribution<T>(Vec<T>);

impl<T: Scalar> TargetDistribution<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        let sum: T = values.iter().copied().sum();
        if values.is_empty() || values.iter().any(|&v| !(v >= T::zero())) || (sum - T::one()).abs() > T::of(1e-6) {
            return Err(Error::Contract(format!("not a distribution: {values:?}")));
        }
        Ok(TargetDistribution(values))
    }

    pub fn one_hot(k: usize, class: usize) -> Self {
        let mut v = vec![T::zero(); k];
        v[class] = T::one();
        TargetDistribution(v)
    }

    /// Uniform over `classes`, for instances carrying several gold relations.
    pub fn uniform_over(k: usize, classes: &[usize]) -> Result<Self> {
        if classes.is_empty() {
            return Err(Error::Contract("no gold classes".into()));
        }
        let mut v = vec![T::zero(); k];
        let share = T::one() / T::of(classes.len() as f64);
        for &c in classes {
            v[c] = v[c] + share;
        }
        Self::new(v)
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The most probable class (lowest index on ties).
    pub fn argmax(&self) -> usize {
        linalg::argmax(&self.0)
    }
}

/// Intermediate values of one forward pass, consumed by [`backward`].
#[derive(Clone, Debug, PartialEq)]
pub struct ForwardCache<T> {
    hp: Hyperparams,
    pub indices: Vec<usize>,
    /// Row `j` is the concatenated window around position `j` (`t × d_w`).
    pub windows: Matrix<T>,
    /// `n1 × t`
    pub z: Matrix<T>,
    pub argmax: Vec<usize>,
    pub pooled: Vec<T>,
    pub hidden_pre: Vec<T>,
    pub hidden: Vec<T>,
    /// `[hidden; lexfeat]`
    pub softmax_input: Vec<T>,
    pub scores: Vec<T>,
    pub probs: Vec<T>,
}

/// Embedding index at window offset `o` around position `j`, PAD outside.
fn window_index(indices: &[usize], j: usize, o: usize, half: usize) -> usize {
    (j + o)
        .checked_sub(half)
        .and_then(|p| indices.get(p))
        .copied()
        .unwrap_or(PAD)
}

fn window_rows<T: Scalar>(indices: &[usize], we: &EmbeddingTable<T>, w: usize) -> Matrix<T> {
    let d = we.dim();
    let half = w / 2;
    let t = indices.len();
    let mut m = Matrix::zeros(t, d * w);
    for j in 0..t {
        let row = m.row_mut(j);
        for o in 0..w {
            row[o * d..(o + 1) * d].copy_from_slice(we.column(window_index(indices, j, o, half)));
        }
    }
    m
}

/// `d_w × t` matrix whose column `j` concatenates the embeddings of
/// positions `j-(w-1)/2 ..= j+(w-1)/2`, PAD outside the sequence.
pub fn window_concat<T: Scalar>(indices: &[usize], we: &EmbeddingTable<T>, w: usize) -> Matrix<T> {
    let rows = window_rows(indices, we, w);
    Matrix::from_fn(rows.cols(), rows.rows(), |r, c| rows.get(c, r))
}

fn check_input<T: Scalar>(
    params: &NetworkParams<T>,
    hp: &Hyperparams,
    indices: &[usize],
    lexfeat: Option<&[T]>,
) -> Result<()> {
    if indices.is_empty() {
        return Err(Error::Contract("empty node sequence".into()));
    }
    if let Some(&bad) = indices.iter().find(|&&i| i >= params.we.columns()) {
        return Err(Error::Contract(format!("node index {bad} outside {} embedding columns", params.we.columns())));
    }
    let f = lexfeat.map_or(0, <[T]>::len);
    if f != hp.f {
        return Err(Error::Dimension(format!("lexical feature length {f}, model expects {}", hp.f)));
    }
    params.check_shapes(hp)
}

pub fn forward<T: Scalar>(
    params: &NetworkParams<T>,
    hp: &Hyperparams,
    indices: &[usize],
    lexfeat: Option<&[T]>,
) -> Result<(Vec<T>, ForwardCache<T>)> {
    check_input(params, hp, indices, lexfeat)?;
    let t = indices.len();
    let windows = window_rows(indices, &params.we, hp.w);

    let mut z = Matrix::zeros(hp.n1, t);
    for i in 0..hp.n1 {
        let filter = params.w1.row(i);
        for j in 0..t {
            *z.get_mut(i, j) = linalg::dot(filter, windows.row(j)) + params.b1[i];
        }
    }
    if !z.all_finite() {
        return Err(Error::Numeric { layer: "convolution" });
    }

    let argmax: Vec<usize> = (0..hp.n1).map(|i| linalg::argmax(z.row(i))).collect();
    let pooled: Vec<T> = argmax.iter().enumerate().map(|(i, &j)| z.get(i, j)).collect();

    let mut hidden_pre = params.w2.matvec(&pooled);
    for (h, &b) in hidden_pre.iter_mut().zip(&params.b2) {
        *h = *h + b;
    }
    let hidden: Vec<T> = hidden_pre.iter().map(|v| v.tanh()).collect();
    if !linalg::all_finite(&hidden) {
        return Err(Error::Numeric { layer: "hidden" });
    }

    let mut softmax_input = hidden.clone();
    softmax_input.extend_from_slice(lexfeat.unwrap_or(&[]));
    let mut scores = params.w3.matvec(&softmax_input);
    for (s, &b) in scores.iter_mut().zip(&params.b3) {
        *s = *s + b;
    }
    if !linalg::all_finite(&scores) {
        return Err(Error::Numeric { layer: "scores" });
    }
    let probs = linalg::softmax(&scores);
    if !linalg::all_finite(&probs) {
        return Err(Error::Numeric { layer: "softmax" });
    }

    let cache = ForwardCache {
        hp: *hp,
        indices: indices.to_vec(),
        windows,
        z,
        argmax,
        pooled,
        hidden_pre,
        hidden,
        softmax_input,
        scores,
        probs: probs.clone(),
    };
    Ok((probs, cache))
}

/// Cross entropy plus `Σ λ_i ‖W_i‖²` over the four weight matrices.
pub fn loss_j<T: Scalar>(probs: &[T], target: &TargetDistribution<T>, params: &NetworkParams<T>, hp: &Hyperparams) -> T {
    cross_entropy(probs, target) + regularization(params, hp)
}

pub fn cross_entropy<T: Scalar>(probs: &[T], target: &TargetDistribution<T>) -> T {
    probs
        .iter()
        .zip(target.as_slice())
        .filter(|(_, &t)| t > T::zero())
        .map(|(&p, &t)| -t * p.ln())
        .sum()
}

pub fn regularization<T: Scalar>(params: &NetworkParams<T>, hp: &Hyperparams) -> T {
    let l = hp.lambdas;
    T::of(l.we) * params.we.frobenius_sq()
        + T::of(l.w1) * params.w1.frobenius_sq()
        + T::of(l.w2) * params.w2.frobenius_sq()
        + T::of(l.w3) * params.w3.frobenius_sq()
}

/// Gradients of the per-example loss. `we` holds only the columns that
/// occur in the input windows.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients<T> {
    pub we: BTreeMap<usize, Vec<T>>,
    pub w1: Matrix<T>,
    pub b1: Vec<T>,
    pub w2: Matrix<T>,
    pub b2: Vec<T>,
    pub w3: Matrix<T>,
    pub b3: Vec<T>,
    /// Gradient at the softmax input, `probs - target`.
    pub scores: Vec<T>,
}

pub fn backward<T: Scalar>(
    cache: &ForwardCache<T>,
    target: &TargetDistribution<T>,
    params: &NetworkParams<T>,
    hp: &Hyperparams,
) -> Result<Gradients<T>> {
    if cache.hp != *hp {
        return Err(Error::Contract("forward cache was produced under different hyperparameters".into()));
    }
    if target.len() != hp.k || cache.probs.len() != hp.k {
        return Err(Error::Contract(format!("target has {} classes, model {}", target.len(), hp.k)));
    }
    params.check_shapes(hp)?;
    let t = cache.indices.len();
    if cache.windows.shape() != (t, hp.d_w()) || cache.z.shape() != (hp.n1, t) {
        return Err(Error::Contract("forward cache shapes are stale".into()));
    }
    let two = T::of(2.0);
    let l = hp.lambdas;

    let d_scores: Vec<T> = cache.probs.iter().zip(target.as_slice()).map(|(&p, &y)| p - y).collect();

    let mut w3 = Matrix::from_fn(hp.k, hp.n2 + hp.f, |r, c| d_scores[r] * cache.softmax_input[c]);
    add_weight_decay(&mut w3, &params.w3, two * T::of(l.w3));
    let d_input = params.w3.matvec_t(&d_scores);

    let d_hidden_pre: Vec<T> = d_input[..hp.n2]
        .iter()
        .zip(&cache.hidden)
        .map(|(&g, &h)| g * (T::one() - h * h))
        .collect();
    let mut w2 = Matrix::from_fn(hp.n2, hp.n1, |r, c| d_hidden_pre[r] * cache.pooled[c]);
    add_weight_decay(&mut w2, &params.w2, two * T::of(l.w2));
    let d_pooled = params.w2.matvec_t(&d_hidden_pre);

    // Max pooling routes each row's gradient to its argmax column only.
    let mut w1 = Matrix::zeros(hp.n1, hp.d_w());
    let mut d_windows = Matrix::zeros(t, hp.d_w());
    for (i, (&j, &g)) in cache.argmax.iter().zip(&d_pooled).enumerate() {
        linalg::axpy(g, cache.windows.row(j), w1.row_mut(i));
        linalg::axpy(g, params.w1.row(i), d_windows.row_mut(j));
    }
    add_weight_decay(&mut w1, &params.w1, two * T::of(l.w1));

    let d = hp.d;
    let half = hp.w / 2;
    let mut we: BTreeMap<usize, Vec<T>> = BTreeMap::new();
    for j in 0..t {
        let row = d_windows.row(j);
        for o in 0..hp.w {
            let col = window_index(&cache.indices, j, o, half);
            let acc = we.entry(col).or_insert_with(|| vec![T::zero(); d]);
            linalg::axpy(T::one(), &row[o * d..(o + 1) * d], acc);
        }
    }
    let decay = two * T::of(l.we);
    for (&col, g) in we.iter_mut() {
        linalg::axpy(decay, params.we.column(col), g);
    }

    Ok(Gradients {
        we,
        w1,
        b1: d_pooled,
        w2,
        b2: d_hidden_pre,
        w3,
        b3: d_scores.clone(),
        scores: d_scores,
    })
}

fn add_weight_decay<T: Scalar>(grad: &mut Matrix<T>, weights: &Matrix<T>, scale: T) {
    if scale != T::zero() {
        linalg::axpy(scale, weights.as_slice(), grad.as_mut_slice());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(columns: usize, d: usize) -> EmbeddingTable<f64> {
        let data = (0..columns * d)
            .map(|i| if i < d { 0.0 } else { (i as f64 * 0.37).sin() })
            .collect();
        EmbeddingTable::from_columns(d, data).unwrap()
    }

    fn small_hp() -> Hyperparams {
        Hyperparams {
            d: 2,
            w: 3,
            n1: 3,
            n2: 2,
            k: 4,
            f: 0,
            lambdas: Lambdas::ZERO,
        }
    }

    #[test]
    fn window_concat_cases() {
        let we = table(5, 2);
        let single = window_concat(&[3], &we, 3);
        assert_eq!(single.shape(), (6, 1));
        let col: Vec<f64> = (0..6).map(|r| single.get(r, 0)).collect();
        let expected: Vec<f64> = [we.column(PAD), we.column(3), we.column(PAD)].concat();
        assert_eq!(col, expected);

        let ident = window_concat(&[2, 3, 4], &we, 1);
        for (j, idx) in [2, 3, 4].into_iter().enumerate() {
            assert_eq!([ident.get(0, j), ident.get(1, j)], we.column(idx));
        }

        let three = window_concat(&[2, 3, 4], &we, 3);
        let middle: Vec<f64> = (0..6).map(|r| three.get(r, 1)).collect();
        assert_eq!(middle, [we.column(2), we.column(3), we.column(4)].concat());
    }

    #[test]
    fn zero_params_give_uniform() {
        let hp = small_hp();
        let params = NetworkParams::<f64>::zeros(&hp, 6);
        let (probs, _) = forward(&params, &hp, &[2, 3, 5, 1], None).unwrap();
        assert!(probs.iter().all(|&p| (p - 0.25).abs() < 1e-15));
    }

    #[test]
    fn single_position_pools_its_column() {
        let hp = small_hp();
        let params = NetworkParams::init(&hp, table(6, 2), 3).unwrap();
        let (_, cache) = forward(&params, &hp, &[4], None).unwrap();
        assert_eq!(cache.pooled, (0..3).map(|i| cache.z.get(i, 0)).collect::<Vec<_>>());
        assert!(cache.argmax.iter().all(|&j| j == 0));
    }

    #[test]
    fn dominated_columns_do_not_change_pooling() {
        // d=1, w=1, W1 = [1], b1 = 0: Z is the embedding value itself.
        let hp = Hyperparams {
            d: 1,
            w: 1,
            n1: 1,
            n2: 1,
            k: 2,
            f: 0,
            lambdas: Lambdas::ZERO,
        };
        let we = EmbeddingTable::from_columns(1, vec![0.0, 0.0, 0.9, -0.5, -0.7]).unwrap();
        let mut params = NetworkParams::init(&hp, we, 0).unwrap();
        params.w1 = Matrix::from_vec(1, 1, vec![1.0]);
        let (p_short, c_short) = forward(&params, &hp, &[2, 3], None).unwrap();
        let (p_long, c_long) = forward(&params, &hp, &[2, 3, 4, 4, 0], None).unwrap();
        assert_eq!(c_short.pooled, c_long.pooled);
        assert_eq!(p_short, p_long);
    }

    #[test]
    fn loss_values() {
        let hp = Hyperparams {
            k: 10,
            ..small_hp()
        };
        let params = NetworkParams::<f64>::zeros(&hp, 3);
        let uniform = vec![0.1; 10];
        let j = loss_j(&uniform, &TargetDistribution::one_hot(10, 4), &params, &hp);
        assert!((j - 10f64.ln()).abs() < 1e-12);

        let t = TargetDistribution::new(vec![0.2, 0.5, 0.3]).unwrap();
        let entropy: f64 = t.as_slice().iter().map(|&p: &f64| -p * p.ln()).sum();
        let hp3 = Hyperparams { k: 3, ..small_hp() };
        let p3 = NetworkParams::<f64>::zeros(&hp3, 3);
        assert!((loss_j(t.as_slice(), &t, &p3, &hp3) - entropy).abs() < 1e-12);
        assert!(loss_j(&[0.3, 0.4, 0.3], &t, &p3, &hp3) > entropy);
    }

    #[test]
    fn regularization_frobenius() {
        let hp = Hyperparams {
            d: 1,
            w: 1,
            n1: 2,
            n2: 2,
            k: 2,
            f: 0,
            lambdas: Lambdas {
                w1: 1.0,
                ..Lambdas::ZERO
            },
        };
        // d_w = 1, so W1 is 2×1; use d = 2, w = 1 for a 2×2 identity.
        let hp = Hyperparams { d: 2, ..hp };
        let mut params = NetworkParams::<f64>::zeros(&hp, 3);
        params.w1 = Matrix::identity(2);
        assert_eq!(regularization(&params, &hp), 2.0);
        // Biases are not regularized.
        params.b1 = vec![5.0, 5.0];
        assert_eq!(regularization(&params, &hp), 2.0);
    }

    #[test]
    fn score_gradient_and_sparsity() {
        let hp = Hyperparams {
            lambdas: Lambdas::default(),
            ..small_hp()
        };
        let params = NetworkParams::init(&hp, table(8, 2), 5).unwrap();
        let (probs, cache) = forward(&params, &hp, &[2, 5, 3], None).unwrap();
        let target = TargetDistribution::one_hot(4, 2);
        let g = backward(&cache, &target, &params, &hp).unwrap();
        for (k, (&gs, &p)) in g.scores.iter().zip(&probs).enumerate() {
            let t = if k == 2 { 1.0 } else { 0.0 };
            assert_eq!(gs, p - t);
        }
        let touched: Vec<usize> = g.we.keys().copied().collect();
        assert_eq!(touched, [PAD, 2, 3, 5]);
    }

    #[test]
    fn mismatched_cache_is_rejected() {
        let hp = small_hp();
        let params = NetworkParams::init(&hp, table(8, 2), 5).unwrap();
        let (_, cache) = forward(&params, &hp, &[2, 5], None).unwrap();
        let other = Hyperparams { n2: 3, ..hp };
        let params_other = NetworkParams::init(&other, table(8, 2), 5).unwrap();
        let target = TargetDistribution::one_hot(4, 0);
        assert!(matches!(
            backward(&cache, &target, &params_other, &other),
            Err(Error::Contract(_))
        ));
        assert!(backward(&cache, &TargetDistribution::one_hot(3, 0), &params, &hp).is_err());
    }

    #[test]
    fn input_contracts() {
        let hp = small_hp();
        let params = NetworkParams::init(&hp, table(4, 2), 5).unwrap();
        assert!(forward(&params, &hp, &[], None).is_err());
        assert!(forward(&params, &hp, &[9], None).is_err());
        assert!(matches!(
            forward(&params, &hp, &[2], Some(&[1.0])),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn non_finite_reports_layer() {
        let hp = small_hp();
        let mut params = NetworkParams::init(&hp, table(4, 2), 5).unwrap();
        params.b1[0] = f64::INFINITY;
        assert!(matches!(
            forward(&params, &hp, &[2], None),
            Err(Error::Numeric { layer: "convolution" })
        ));
    }

    #[test]
    fn f32_forward_works() {
        let hp = small_hp();
        let data: Vec<f32> = (0..8).map(|i| i as f32 * 0.1).collect();
        let params = NetworkParams::init(&hp, EmbeddingTable::from_columns(2, data).unwrap(), 1).unwrap();
        let (probs, _) = forward(&params, &hp, &[1, 2, 3], None).unwrap();
        assert!((probs.iter().sum::<f32>() - 1.0).abs() < 1e-5);
    }
}
