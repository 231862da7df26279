//! Embedding parameters and objective/gradient math.
//!
//! Two independent parameter blocks: word vectors W and context vectors C.
//! The same surface string has distinct word and context representations.
//! All objectives follow the maximization convention, so logged values are
//! directly the (negative) log-likelihood sums, never a negated loss.

use rand::Rng;

use crate::error::{Error, Result};
use crate::vocab::{TrainingPair, WordId};

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    word_vectors: Vec<f64>,
    context_vectors: Vec<f64>,
    vocab_size: usize,
    dim: usize,
}

impl EmbeddingModel {
    /// All parameters zero. Initial objective on any pair set is exactly
    /// (|D| + |D'|) * log(0.5), a useful test anchor.
    pub fn zeros(vocab_size: usize, dim: usize) -> Self {
        EmbeddingModel {
            word_vectors: vec![0.0; vocab_size * dim],
            context_vectors: vec![0.0; vocab_size * dim],
            vocab_size,
            dim,
        }
    }

    /// word2vec-style init: W rows uniform in [-0.5/d, 0.5/d], C rows zero.
    pub fn init<R: Rng>(vocab_size: usize, dim: usize, rng: &mut R) -> Self {
        let mut model = Self::zeros(vocab_size, dim);
        let half = 0.5 / dim as f64;
        for v in &mut model.word_vectors {
            *v = rng.random_range(-half..half);
        }
        model
    }

    /// Builds a model from explicit word-vector rows; context vectors zero.
    pub fn from_word_rows(rows: Vec<Vec<f64>>) -> Self {
        let vocab_size = rows.len();
        let dim = rows.first().map_or(0, Vec::len);
        let mut model = Self::zeros(vocab_size, dim);
        for (id, row) in rows.into_iter().enumerate() {
            assert_eq!(row.len(), dim);
            model.word_row_mut(id).copy_from_slice(&row);
        }
        model
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn word_row(&self, id: WordId) -> &[f64] {
        &self.word_vectors[id * self.dim..(id + 1) * self.dim]
    }

    pub fn word_row_mut(&mut self, id: WordId) -> &mut [f64] {
        &mut self.word_vectors[id * self.dim..(id + 1) * self.dim]
    }

    pub fn context_row(&self, id: WordId) -> &[f64] {
        &self.context_vectors[id * self.dim..(id + 1) * self.dim]
    }

    pub fn context_row_mut(&mut self, id: WordId) -> &mut [f64] {
        &mut self.context_vectors[id * self.dim..(id + 1) * self.dim]
    }

    /// v_c . v_w for a word/context pair.
    pub fn pair_dot(&self, word: WordId, context: WordId) -> f64 {
        dot(self.word_row(word), self.context_row(context))
    }

    pub fn all_finite(&self) -> bool {
        self.word_vectors.iter().all(|v| v.is_finite())
            && self.context_vectors.iter().all(|v| v.is_finite())
    }

}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// One positive pair with its sampled negative contexts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairBatch {
    pub positive: TrainingPair,
    pub negatives: Vec<WordId>,
}

/// 1 / (1 + e^(-x)), branch chosen to avoid overflow on either tail.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// log sigma(x) computed directly; never log(sigmoid(x)), which loses the
/// entire tail for large x.
pub fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

/// Exact softmax p(c|w) over all contexts, with max-subtraction.
/// Verification path: cost is O(|V| d) per call.
pub fn softmax_prob(model: &EmbeddingModel, word: WordId, context: WordId) -> f64 {
    let w = model.word_row(word);
    let dots: Vec<f64> = (0..model.vocab_size())
        .map(|c| dot(model.context_row(c), w))
        .collect();
    let max = dots.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let denom: f64 = dots.iter().map(|d| (d - max).exp()).sum();
    (dots[context] - max).exp() / denom
}

/// Log skip-gram objective: sum over D of [v_c . v_w - log sum_c' e^(v_c' . v_w)].
/// Empty pair set is 0 by convention; otherwise always <= 0.
pub fn softmax_corpus_objective(model: &EmbeddingModel, pairs: &[TrainingPair]) -> f64 {
    let mut total = 0.0;
    for p in pairs {
        let w = model.word_row(p.word);
        let dots: Vec<f64> = (0..model.vocab_size())
            .map(|c| dot(model.context_row(c), w))
            .collect();
        let max = dots.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let log_denom = max + dots.iter().map(|d| (d - max).exp()).sum::<f64>().ln();
        total += dots[p.context] - log_denom;
    }
    total
}

/// Per-example negative-sampling objective:
/// log sigma(v_c . v_w) + sum_j log sigma(-v_cj . v_w).
pub fn ns_pair_objective(model: &EmbeddingModel, batch: &PairBatch) -> f64 {
    let mut obj = log_sigmoid(model.pair_dot(batch.positive.word, batch.positive.context));
    for &neg in &batch.negatives {
        obj += log_sigmoid(-model.pair_dot(batch.positive.word, neg));
    }
    obj
}

/// Corpus-level form over D and D'. Equal to the sum of per-example
/// batches when D' is partitioned per positive, as an exact identity.
pub fn ns_corpus_objective(
    model: &EmbeddingModel,
    positives: &[TrainingPair],
    negatives: &[TrainingPair],
) -> f64 {
    let pos: f64 = positives
        .iter()
        .map(|p| log_sigmoid(model.pair_dot(p.word, p.context)))
        .sum();
    let neg: f64 = negatives
        .iter()
        .map(|p| log_sigmoid(-model.pair_dot(p.word, p.context)))
        .sum();
    pos + neg
}

/// Ascent-direction gradient fragments for one batch.
///
/// Negatives keep one fragment per draw; a context sampled twice appears
/// twice and both fragments are applied.
#[derive(Debug, Clone)]
pub struct NsGradients {
    pub word: Vec<f64>,
    pub positive_context: Vec<f64>,
    pub negative_contexts: Vec<(WordId, Vec<f64>)>,
}

/// d/dv_w = (1 - sigma(v_c . v_w)) v_c - sum_j sigma(v_cj . v_w) v_cj
/// d/dv_c = (1 - sigma(v_c . v_w)) v_w
/// d/dv_cj = -sigma(v_cj . v_w) v_w
pub fn ns_gradients(model: &EmbeddingModel, batch: &PairBatch) -> NsGradients {
    let dim = model.dim();
    let word = batch.positive.word;
    let w = model.word_row(word);

    let pos_coeff = 1.0 - sigmoid(model.pair_dot(word, batch.positive.context));
    let pos_ctx = model.context_row(batch.positive.context);

    let mut grad_word = vec![0.0; dim];
    for i in 0..dim {
        grad_word[i] = pos_coeff * pos_ctx[i];
    }
    let grad_pos: Vec<f64> = w.iter().map(|&x| pos_coeff * x).collect();

    let mut negative_contexts = Vec::with_capacity(batch.negatives.len());
    for &neg in &batch.negatives {
        let coeff = sigmoid(model.pair_dot(word, neg));
        let neg_ctx = model.context_row(neg);
        for i in 0..dim {
            grad_word[i] -= coeff * neg_ctx[i];
        }
        negative_contexts.push((neg, w.iter().map(|&x| -coeff * x).collect()));
    }

    NsGradients {
        word: grad_word,
        positive_context: grad_pos,
        negative_contexts,
    }
}

/// One gradient-ascent step: each touched row += learning_rate * fragment.
/// Rows not named in the batch are untouched. A non-finite update aborts
/// before any row is written.
pub fn sgd_apply(
    model: &mut EmbeddingModel,
    batch: &PairBatch,
    gradients: &NsGradients,
    learning_rate: f64,
) -> Result<()> {
    let finite = gradients.word.iter().all(|g| g.is_finite())
        && gradients.positive_context.iter().all(|g| g.is_finite())
        && gradients
            .negative_contexts
            .iter()
            .all(|(_, g)| g.iter().all(|v| v.is_finite()));
    if !finite || !learning_rate.is_finite() {
        return Err(Error::NonFiniteUpdate {
            row: batch.positive.word,
        });
    }

    axpy(
        model.word_row_mut(batch.positive.word),
        &gradients.word,
        learning_rate,
    );
    axpy(
        model.context_row_mut(batch.positive.context),
        &gradients.positive_context,
        learning_rate,
    );
    for (id, frag) in &gradients.negative_contexts {
        axpy(model.context_row_mut(*id), frag, learning_rate);
    }
    Ok(())
}

fn axpy(row: &mut [f64], grad: &[f64], scale: f64) {
    for (r, g) in row.iter_mut().zip(grad) {
        *r += scale * g;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn random_model(vocab_size: usize, dim: usize, seed: u64) -> EmbeddingModel {
        let mut r = rng(seed);
        let mut m = EmbeddingModel::zeros(vocab_size, dim);
        for id in 0..vocab_size {
            for v in m.word_row_mut(id) {
                *v = r.random_range(-1.0..1.0);
            }
            for v in m.context_row_mut(id) {
                *v = r.random_range(-1.0..1.0);
            }
        }
        m
    }

    #[test]
    fn sigmoid_values() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(40.0) >= 1.0 - 1e-17);
        assert!((sigmoid(2.0) - 0.8807971).abs() < 1e-7);
        // no overflow far out on either tail
        assert_eq!(sigmoid(1000.0), 1.0);
        assert_eq!(sigmoid(-1000.0), 0.0);
    }

    #[test]
    fn log_sigmoid_keeps_the_tail() {
        // log sigma(40) = -log(1 + e^-40) ~ -4.25e-18; log(sigmoid(40))
        // would round to exactly 0.
        let ls = log_sigmoid(40.0);
        assert!(ls < 0.0);
        assert!(ls > -1e-17);
        assert!((log_sigmoid(-1000.0) - (-1000.0)).abs() < 1e-9);
    }

    #[test]
    fn softmax_uniform_for_zero_model() {
        let m = EmbeddingModel::zeros(7, 3);
        for w in 0..7 {
            for c in 0..7 {
                assert!((softmax_prob(&m, w, c) - 1.0 / 7.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn softmax_singleton_vocab() {
        let m = random_model(1, 4, 1);
        assert!((softmax_prob(&m, 0, 0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn softmax_two_contexts_hand_value() {
        // dots (1, 0) -> p = e / (e + 1)
        let mut m = EmbeddingModel::zeros(2, 1);
        m.word_row_mut(0)[0] = 1.0;
        m.context_row_mut(0)[0] = 1.0;
        m.context_row_mut(1)[0] = 0.0;
        let p = softmax_prob(&m, 0, 0);
        assert!((p - std::f64::consts::E / (std::f64::consts::E + 1.0)).abs() < 1e-12);
        assert!((p - 0.731059).abs() < 1e-6);
    }

    #[test]
    fn softmax_rows_normalize() {
        let m = random_model(12, 5, 2);
        for w in 0..12 {
            let sum: f64 = (0..12).map(|c| softmax_prob(&m, w, c)).sum();
            assert!((sum - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn softmax_objective_empty_and_uniform() {
        let m = EmbeddingModel::zeros(5, 3);
        assert_eq!(softmax_corpus_objective(&m, &[]), 0.0);
        let pairs: Vec<TrainingPair> = (0..8)
            .map(|i| TrainingPair {
                word: i % 5,
                context: (i + 1) % 5,
            })
            .collect();
        let obj = softmax_corpus_objective(&m, &pairs);
        assert!((obj - (-(8.0) * 5f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn softmax_objective_matches_per_pair_oracle() {
        let m = random_model(6, 4, 3);
        let mut r = rng(4);
        let pairs: Vec<TrainingPair> = (0..20)
            .map(|_| TrainingPair {
                word: r.random_range(0..6),
                context: r.random_range(0..6),
            })
            .collect();
        let oracle: f64 = pairs
            .iter()
            .map(|p| softmax_prob(&m, p.word, p.context).ln())
            .sum();
        let obj = softmax_corpus_objective(&m, &pairs);
        assert!((obj - oracle).abs() < 1e-9);
        assert!(obj <= 0.0);
    }

    #[test]
    fn ns_pair_objective_zero_model() {
        let m = EmbeddingModel::zeros(3, 2);
        let batch = PairBatch {
            positive: TrainingPair {
                word: 0,
                context: 1,
            },
            negatives: vec![2],
        };
        let obj = ns_pair_objective(&m, &batch);
        assert!((obj - 2.0 * 0.5f64.ln()).abs() < 1e-12);
        assert!((obj - (-1.386294)).abs() < 1e-6);
    }

    #[test]
    fn ns_pair_objective_trivial_solution_regime() {
        // positive dot 40, negative dots -40: objective within (k+1)*1e-17 of 0
        let dim = 4;
        let u = (40.0f64 / dim as f64).sqrt();
        let mut m = EmbeddingModel::zeros(3, dim);
        for id in 0..3 {
            m.word_row_mut(id).fill(u);
            m.context_row_mut(id).fill(u);
        }
        // flip negatives' contexts to get dot -40
        m.context_row_mut(2).fill(-u);
        let k = 1;
        let batch = PairBatch {
            positive: TrainingPair {
                word: 0,
                context: 1,
            },
            negatives: vec![2],
        };
        let obj = ns_pair_objective(&m, &batch);
        assert!(obj >= -((k + 1) as f64) * 1e-17, "obj = {obj}");
    }

    // Scalar reimplementation using only exp/log, no shared helpers.
    fn ns_pair_oracle(m: &EmbeddingModel, batch: &PairBatch) -> f64 {
        let d = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| x * y).sum() };
        let w = m.word_row(batch.positive.word);
        let pos = d(w, m.context_row(batch.positive.context));
        let mut obj = (1.0 / (1.0 + (-pos).exp())).ln();
        for &n in &batch.negatives {
            let x = -d(w, m.context_row(n));
            obj += (1.0 / (1.0 + (-x).exp())).ln();
        }
        obj
    }

    #[test]
    fn ns_pair_objective_matches_scalar_oracle() {
        let m = random_model(3, 5, 5);
        let batch = PairBatch {
            positive: TrainingPair {
                word: 1,
                context: 0,
            },
            negatives: vec![2, 0, 2],
        };
        let got = ns_pair_objective(&m, &batch);
        let want = ns_pair_oracle(&m, &batch);
        assert!((got - want).abs() < 1e-12);
    }

    #[test]
    fn ns_corpus_objective_empty_and_zero_model() {
        let m = EmbeddingModel::zeros(4, 3);
        assert_eq!(ns_corpus_objective(&m, &[], &[]), 0.0);
        let positives: Vec<TrainingPair> = (0..6)
            .map(|i| TrainingPair {
                word: i % 4,
                context: (i + 1) % 4,
            })
            .collect();
        let negatives: Vec<TrainingPair> = (0..12)
            .map(|i| TrainingPair {
                word: i % 4,
                context: (i + 2) % 4,
            })
            .collect();
        let obj = ns_corpus_objective(&m, &positives, &negatives);
        assert!((obj - 18.0 * 0.5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn corpus_objective_equals_batch_partition() {
        let m = random_model(9, 4, 6);
        let mut r = rng(7);
        let mut positives = Vec::new();
        let mut negatives = Vec::new();
        let mut batch_sum = 0.0;
        for _ in 0..50 {
            let p = TrainingPair {
                word: r.random_range(0..9),
                context: r.random_range(0..9),
            };
            let negs: Vec<usize> = (0..5).map(|_| r.random_range(0..9)).collect();
            for &n in &negs {
                negatives.push(TrainingPair {
                    word: p.word,
                    context: n,
                });
            }
            batch_sum += ns_pair_objective(
                &m,
                &PairBatch {
                    positive: p,
                    negatives: negs,
                },
            );
            positives.push(p);
        }
        let corpus = ns_corpus_objective(&m, &positives, &negatives);
        assert!((corpus - batch_sum).abs() < 1e-10);
    }

    #[test]
    fn gradients_zero_model_are_zero() {
        let m = EmbeddingModel::zeros(4, 3);
        let batch = PairBatch {
            positive: TrainingPair {
                word: 0,
                context: 1,
            },
            negatives: vec![2, 3],
        };
        let g = ns_gradients(&m, &batch);
        assert!(g.word.iter().all(|&v| v == 0.0));
        assert!(g.positive_context.iter().all(|&v| v == 0.0));
        assert!(g
            .negative_contexts
            .iter()
            .all(|(_, f)| f.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn gradient_on_positive_context_vanishes_at_large_dot() {
        let dim = 2;
        let mut m = EmbeddingModel::zeros(2, dim);
        m.word_row_mut(0).fill(10.0);
        m.context_row_mut(1).fill(10.0); // dot = 200
        let batch = PairBatch {
            positive: TrainingPair {
                word: 0,
                context: 1,
            },
            negatives: vec![0],
        };
        let g = ns_gradients(&m, &batch);
        for v in &g.positive_context {
            assert!(v.abs() < 1e-12);
        }
    }

    /// Central finite differences of ns_pair_objective, step 1e-5, over
    /// every parameter touched by the batch.
    fn finite_difference_check(m: &EmbeddingModel, batch: &PairBatch, tol: f64) {
        let h = 1e-5;
        let g = ns_gradients(m, batch);
        let dim = m.dim();

        let check = |analytic: &[f64], perturb: &dyn Fn(&mut EmbeddingModel, usize, f64)| {
            for i in 0..dim {
                let mut plus = m.clone();
                perturb(&mut plus, i, h);
                let mut minus = m.clone();
                perturb(&mut minus, i, -h);
                let fd = (ns_pair_objective(&plus, batch) - ns_pair_objective(&minus, batch))
                    / (2.0 * h);
                let denom = analytic[i].abs().max(fd.abs()).max(1e-8);
                assert!(
                    (analytic[i] - fd).abs() / denom < tol,
                    "coord {i}: analytic {} vs fd {fd}",
                    analytic[i]
                );
            }
        };

        let word = batch.positive.word;
        check(&g.word, &|m, i, eps| m.word_row_mut(word)[i] += eps);
        let ctx = batch.positive.context;
        check(&g.positive_context, &|m, i, eps| {
            m.context_row_mut(ctx)[i] += eps
        });
        // duplicate negative ids share a parameter; sum their fragments
        let mut summed: std::collections::HashMap<usize, Vec<f64>> = Default::default();
        for (id, frag) in &g.negative_contexts {
            let entry = summed.entry(*id).or_insert_with(|| vec![0.0; dim]);
            for i in 0..dim {
                entry[i] += frag[i];
            }
        }
        for (id, frag) in summed {
            if id == ctx {
                // overlaps the positive context parameter; skip here, the
                // acceptance suite draws non-overlapping batches
                continue;
            }
            check(&frag, &|m, i, eps| m.context_row_mut(id)[i] += eps);
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let m = random_model(8, 7, 8);
        let batch = PairBatch {
            positive: TrainingPair {
                word: 2,
                context: 5,
            },
            negatives: vec![0, 3, 3, 7],
        };
        finite_difference_check(&m, &batch, 1e-5);
    }

    #[test]
    fn sgd_zero_rate_or_zero_grads_is_identity() {
        let m0 = random_model(4, 3, 9);
        let batch = PairBatch {
            positive: TrainingPair {
                word: 0,
                context: 1,
            },
            negatives: vec![2],
        };
        let g = ns_gradients(&m0, &batch);
        let mut m = m0.clone();
        sgd_apply(&mut m, &batch, &g, 0.0).unwrap();
        assert_eq!(m, m0);

        let zero = EmbeddingModel::zeros(4, 3);
        let gz = ns_gradients(&zero, &batch);
        let mut m = m0.clone();
        sgd_apply(&mut m, &batch, &gz, 0.1).unwrap();
        assert_eq!(m, m0);
    }

    #[test]
    fn sgd_step_raises_pair_objective() {
        let m0 = random_model(2, 4, 10);
        let batch = PairBatch {
            positive: TrainingPair {
                word: 0,
                context: 1,
            },
            negatives: vec![0],
        };
        let before = ns_pair_objective(&m0, &batch);
        let g = ns_gradients(&m0, &batch);
        let mut m = m0.clone();
        sgd_apply(&mut m, &batch, &g, 1e-3).unwrap();
        let after = ns_pair_objective(&m, &batch);
        assert!(after > before, "{after} <= {before}");
    }

    #[test]
    fn sgd_rejects_non_finite() {
        let mut m = EmbeddingModel::zeros(2, 2);
        let batch = PairBatch {
            positive: TrainingPair {
                word: 0,
                context: 1,
            },
            negatives: vec![],
        };
        let g = NsGradients {
            word: vec![f64::NAN, 0.0],
            positive_context: vec![0.0, 0.0],
            negative_contexts: vec![],
        };
        assert!(sgd_apply(&mut m, &batch, &g, 0.1).is_err());
        assert!(m.all_finite());
    }

    #[test]
    fn untouched_rows_bit_identical_after_step() {
        let m0 = random_model(6, 3, 11);
        let batch = PairBatch {
            positive: TrainingPair {
                word: 1,
                context: 2,
            },
            negatives: vec![4],
        };
        let g = ns_gradients(&m0, &batch);
        let mut m = m0.clone();
        sgd_apply(&mut m, &batch, &g, 0.05).unwrap();
        for id in [0usize, 3, 5] {
            assert_eq!(m.word_row(id), m0.word_row(id));
            assert_eq!(m.context_row(id), m0.context_row(id));
        }
        assert_eq!(m.context_row(0), m0.context_row(0));
        assert_eq!(m.context_row(3), m0.context_row(3));
    }

    proptest! {
        #[test]
        fn sigmoid_complement_identity(x in -500.0f64..500.0) {
            let s = sigmoid(x) + sigmoid(-x);
            prop_assert!((s - 1.0).abs() < 1e-12);
        }

        #[test]
        fn log_sigmoid_never_positive(x in -1e3f64..1e3) {
            prop_assert!(log_sigmoid(x) <= 0.0);
        }
    }
}
