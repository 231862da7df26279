//! Noise distribution for negative sampling: unigram counts raised to a
//! power (3/4 by default), sampled by inverse CDF over a prefix-sum table.
//!
//! Exact probabilities and O(log |V|) draws; word2vec's 1e8-slot integer
//! table would approximate the same law and could be swapped in behind
//! `sample`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::vocab::{TrainingPair, Vocabulary, WordId};

pub const DEFAULT_POWER: f64 = 0.75;

/// Retries before a draw colliding with the positive context is accepted
/// as-is. Keeps singleton vocabularies from spinning forever.
pub const REJECTION_RETRY_CAP: usize = 8;

#[derive(Debug, Clone)]
pub struct NoiseDistribution {
    probs: Vec<f64>,
    cumulative: Vec<f64>,
    z: f64,
}

impl NoiseDistribution {
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn prob(&self, id: WordId) -> f64 {
        self.probs[id]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Normalization constant Z = sum over contexts of count^power.
    pub fn z(&self) -> f64 {
        self.z
    }

    /// One unconditioned draw by binary search over the prefix sums.
    /// Ties on a table boundary resolve toward the lower id.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> WordId {
        let u: f64 = rng.random::<f64>() * self.z;
        // first index whose cumulative sum covers u
        let id = self.cumulative.partition_point(|&c| c < u);
        id.min(self.probs.len() - 1)
    }
}

/// Builds p(c) = count(c)^power / Z over the whole vocabulary.
pub fn build_noise_distribution(vocab: &Vocabulary, power: f64) -> Result<NoiseDistribution> {
    if vocab.is_empty() {
        return Err(Error::EmptyVocabulary { min_count: 0 });
    }
    let weights: Vec<f64> = vocab
        .counts()
        .iter()
        .map(|&c| (c as f64).powf(power))
        .collect();
    let z: f64 = weights.iter().sum();
    let probs: Vec<f64> = weights.iter().map(|&w| w / z).collect();
    let mut cumulative = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for w in &weights {
        acc += w;
        cumulative.push(acc);
    }
    Ok(NoiseDistribution {
        probs,
        cumulative,
        z,
    })
}

/// Draws `n_negatives` context ids i.i.d. from `dist`. A draw equal to the
/// positive context is rejected and redrawn up to [`REJECTION_RETRY_CAP`]
/// times, then accepted as-is.
pub fn draw_negatives<R: Rng>(
    positive: TrainingPair,
    n_negatives: usize,
    dist: &NoiseDistribution,
    rng: &mut R,
) -> Vec<WordId> {
    let mut out = Vec::with_capacity(n_negatives);
    for _ in 0..n_negatives {
        let mut draw = dist.sample(rng);
        let mut retries = 0;
        while draw == positive.context && retries < REJECTION_RETRY_CAP {
            draw = dist.sample(rng);
            retries += 1;
        }
        out.push(draw);
    }
    out
}
