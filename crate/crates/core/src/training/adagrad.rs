use crate::embeddings::EmbeddingTable;
use crate::linalg::Matrix;
use crate::network::{Gradients, NetworkParams};
use crate::scalar::Scalar;

/// Accumulated squared gradients, one entry per parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct AdagradState<T> {
    pub we: EmbeddingTable<T>,
    pub w1: Matrix<T>,
    pub b1: Vec<T>,
    pub w2: Matrix<T>,
    pub b2: Vec<T>,
    pub w3: Matrix<T>,
    pub b3: Vec<T>,
}

impl<T: Scalar> AdagradState<T> {
    pub fn new(params: &NetworkParams<T>) -> Self {
        let zeros = |m: &Matrix<T>| Matrix::zeros(m.rows(), m.cols());
        AdagradState {
            we: EmbeddingTable::zeros(params.we.dim(), params.we.columns()),
            w1: zeros(&params.w1),
            b1: vec![T::zero(); params.b1.len()],
            w2: zeros(&params.w2),
            b2: vec![T::zero(); params.b2.len()],
            w3: zeros(&params.w3),
            b3: vec![T::zero(); params.b3.len()],
        }
    }
}

fn step<T: Scalar>(param: &mut [T], grad: &[T], acc: &mut [T], lr: T, eps: T) {
    for ((p, &g), s) in param.iter_mut().zip(grad).zip(acc) {
        if g == T::zero() {
            continue;
        }
        *s = *s + g * g;
        *p = *p - lr * g / (s.sqrt() + eps);
    }
}

/// `state += g²; param -= lr · g / (√state + ε)`. Only the embedding columns
/// present in `grads.we` are touched.
pub fn adagrad_update<T: Scalar>(
    params: &mut NetworkParams<T>,
    grads: &Gradients<T>,
    state: &mut AdagradState<T>,
    learning_rate: T,
    epsilon: T,
) {
    let (lr, eps) = (learning_rate, epsilon);
    for (&col, g) in &grads.we {
        step(params.we.column_mut(col), g, state.we.column_mut(col), lr, eps);
    }
    step(params.w1.as_mut_slice(), grads.w1.as_slice(), state.w1.as_mut_slice(), lr, eps);
    step(&mut params.b1, &grads.b1, &mut state.b1, lr, eps);
    step(params.w2.as_mut_slice(), grads.w2.as_slice(), state.w2.as_mut_slice(), lr, eps);
    step(&mut params.b2, &grads.b2, &mut state.b2, lr, eps);
    step(params.w3.as_mut_slice(), grads.w3.as_slice(), state.w3.as_mut_slice(), lr, eps);
    step(&mut params.b3, &grads.b3, &mut state.b3, lr, eps);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_is_sign_times_lr() {
        let mut p = [1.0f64, 1.0, 1.0];
        let mut s = [0.0; 3];
        step(&mut p, &[0.5, -2.0, 1e-3], &mut s, 0.1, 1e-12);
        for (v, sign) in p.iter().zip([1.0, -1.0, 1.0]) {
            assert!((v - (1.0 - 0.1 * sign)).abs() < 1e-8);
        }
        assert_eq!(s, [0.25, 4.0, 1e-6]);
    }

    #[test]
    fn zero_gradient_changes_nothing() {
        let mut p = [0.3, -0.7];
        let mut s = [0.0, 2.0];
        step(&mut p, &[0.0, 0.0], &mut s, 0.1, 1e-6);
        assert_eq!(p, [0.3, -0.7]);
        assert_eq!(s, [0.0, 2.0]);
    }

    #[test]
    fn second_identical_step_shrinks_by_sqrt_two() {
        let (g, lr) = (0.8f64, 0.05);
        let mut p = [0.0];
        let mut s = [0.0];
        step(&mut p, &[g], &mut s, lr, 0.0);
        let first = p[0];
        step(&mut p, &[g], &mut s, lr, 0.0);
        let second = p[0] - first;
        // Closed form: -lr·g/|g| then -lr·g/(√2·|g|).
        assert!((first + lr).abs() < 1e-15);
        assert!((second / first - 1.0 / 2f64.sqrt()).abs() < 1e-12);
    }
}
