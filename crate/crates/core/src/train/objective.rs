//! Negative-sampling objective, its gradient, and the full-softmax loss.
//!
//! For a target `t`, context `c` and drawn negatives `n_1..n_k` the
//! maximized objective is
//!
//! ```text
//! log σ(v_c·u_t) + Σ_s log σ(−v_{n_s}·u_t)
//! ```
//!
//! where `u` rows come from the input matrix and `v` rows from the output
//! matrix.

use crate::embeddings::{EmbeddingStore, Matrix, Real};

pub fn sigmoid<F: Real>(x: F) -> F {
    F::one() / (F::one() + (-x).exp())
}

/// `log σ(x)`, stable for large |x|.
pub fn log_sigmoid<F: Real>(x: F) -> F {
    // log σ(x) = -softplus(-x), softplus(z) = max(z, 0) + log1p(exp(-|z|))
    let z = -x;
    -(z.max(F::zero()) + (-z.abs()).exp().ln_1p())
}

pub(crate) fn dot<F: Real>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b).fold(F::zero(), |acc, (&x, &y)| acc + x * y)
}

fn parameters<F: Real>(store: &EmbeddingStore<F>) -> (&Matrix<F>, &Matrix<F>) {
    let output = store
        .output()
        .expect("objective requires a store with an output matrix");
    (store.input(), output)
}

/// Objective value for one pair and its negatives.
///
/// # Panics
///
/// If the store has no output matrix (stores loaded from disk).
pub fn ns_objective<F: Real>(
    store: &EmbeddingStore<F>,
    target: u32,
    context: u32,
    negatives: &[u32],
) -> F {
    let (input, output) = parameters(store);
    let u = input.row(target as usize);
    let positive = log_sigmoid(dot(output.row(context as usize), u));
    negatives.iter().fold(positive, |acc, &n| {
        acc + log_sigmoid(-dot(output.row(n as usize), u))
    })
}

/// Gradient of [`ns_objective`] (ascent direction) with respect to every
/// touched row. Each negative slot is reported separately, even when ids
/// repeat or coincide with the context.
#[derive(Clone, Debug, PartialEq)]
pub struct NsGradient<F> {
    pub target: Vec<F>,
    pub context: Vec<F>,
    pub negatives: Vec<Vec<F>>,
}

impl<F: Real> NsGradient<F> {
    pub fn is_zero(&self) -> bool {
        self.target
            .iter()
            .chain(&self.context)
            .chain(self.negatives.iter().flatten())
            .all(|v| v.is_zero())
    }
}

/// Analytic gradient of the negative-sampling objective. Does not mutate the
/// store.
///
/// # Panics
///
/// If the store has no output matrix or `negatives` is empty.
pub fn ns_step_gradient<F: Real>(
    store: &EmbeddingStore<F>,
    target: u32,
    context: u32,
    negatives: &[u32],
) -> NsGradient<F> {
    assert!(
        !negatives.is_empty(),
        "at least one negative sample is required"
    );
    let (input, output) = parameters(store);
    let u = input.row(target as usize);

    let v_c = output.row(context as usize);
    let g_pos = F::one() - sigmoid(dot(v_c, u));
    let mut grad_u: Vec<F> = v_c.iter().map(|&v| g_pos * v).collect();
    let grad_context = u.iter().map(|&x| g_pos * x).collect();

    let grad_negatives = negatives
        .iter()
        .map(|&n| {
            let v_n = output.row(n as usize);
            let g_neg = -sigmoid(dot(v_n, u));
            for (g, &v) in grad_u.iter_mut().zip(v_n) {
                *g = *g + g_neg * v;
            }
            u.iter().map(|&x| g_neg * x).collect()
        })
        .collect();

    NsGradient {
        target: grad_u,
        context: grad_context,
        negatives: grad_negatives,
    }
}

/// `−log p(context | target)` under the full softmax over the vocabulary.
/// Only meant for vocabularies small enough to enumerate.
///
/// # Panics
///
/// If the store has no output matrix.
pub fn exact_softmax_loss<F: Real>(store: &EmbeddingStore<F>, target: u32, context: u32) -> F {
    let (input, output) = parameters(store);
    let u = input.row(target as usize);
    let logits: Vec<F> = (0..output.rows()).map(|w| dot(output.row(w), u)).collect();
    softmax_loss_from_logits(&logits, context as usize)
}

/// `logsumexp(logits) − logits[true_class]` with max shifting.
pub fn softmax_loss_from_logits<F: Real>(logits: &[F], true_class: usize) -> F {
    let max = logits.iter().copied().fold(F::neg_infinity(), F::max);
    let sum = logits
        .iter()
        .fold(F::zero(), |acc, &l| acc + (l - max).exp());
    max + sum.ln() - logits[true_class]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero_store(v: usize, dim: usize) -> EmbeddingStore<f64> {
        let keys = (0..v).map(|i| format!("k{i}")).collect();
        EmbeddingStore::new(keys, Matrix::zeros(v, dim), Some(Matrix::zeros(v, dim))).unwrap()
    }

    #[test]
    fn zero_parameters_give_zero_gradient() {
        let store = zero_store(5, 4);
        let grad = ns_step_gradient(&store, 0, 1, &[2, 3]);
        assert!(grad.is_zero());
        assert_eq!(grad.negatives.len(), 2);
    }

    #[test]
    fn duplicate_negatives_are_separate_slots() {
        let keys = (0..3).map(|i| format!("k{i}")).collect();
        let input = Matrix::from_vec(3, 2, vec![0.3, -0.2, 0.1, 0.4, -0.5, 0.2]).unwrap();
        let output = Matrix::from_vec(3, 2, vec![0.2, 0.1, -0.3, 0.6, 0.05, -0.1]).unwrap();
        let store = EmbeddingStore::new(keys, input, Some(output)).unwrap();
        let grad = ns_step_gradient(&store, 0, 1, &[1, 1, 2]);
        assert_eq!(grad.negatives.len(), 3);
        assert_eq!(grad.negatives[0], grad.negatives[1]);
        let single = ns_step_gradient(&store, 0, 1, &[1]);
        assert_eq!(single.negatives[0], grad.negatives[0]);
    }

    #[test]
    fn uniform_softmax() {
        let store = zero_store(4, 3);
        assert!((exact_softmax_loss(&store, 0, 2) - 4f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn two_class_softmax() {
        // log(1 + e^-1)
        let loss = softmax_loss_from_logits(&[1.0f64, 0.0], 0);
        assert!((loss - 0.313_261_687_518_222_8).abs() < 1e-15);
        assert!((loss - 0.31326).abs() < 1e-5);
    }

    #[test]
    fn softmax_shift_invariance() {
        let logits = [0.3f64, -1.2, 2.5, 0.0, 0.7];
        for shift in [-100.0, -1.0, 3.5, 500.0] {
            let shifted: Vec<f64> = logits.iter().map(|l| l + shift).collect();
            for c in 0..logits.len() {
                let a = softmax_loss_from_logits(&logits, c);
                let b = softmax_loss_from_logits(&shifted, c);
                assert!((a - b).abs() < 1e-12, "{a} {b}");
            }
        }
    }

    #[test]
    fn log_sigmoid_is_stable() {
        assert!((log_sigmoid(0.0f64) - 0.5f64.ln()).abs() < 1e-15);
        assert!(log_sigmoid(-800.0f64).is_finite());
        assert_eq!(log_sigmoid(800.0f64), 0.0);
        for x in [-5.0f64, -0.3, 0.2, 4.0] {
            assert!((log_sigmoid(x) - sigmoid(x).ln()).abs() < 1e-14);
        }
    }
}
