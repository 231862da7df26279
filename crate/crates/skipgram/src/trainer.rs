//! Training orchestration: epochs over the corpus, subsampling, pair
//! extraction, negative draws, SGD steps, and linear learning-rate decay.
//!
//! `workers = 1` is strictly sequential and bit-reproducible for a fixed
//! seed; that is the mode every correctness test runs in. `workers > 1`
//! shards the corpus by contiguous line ranges and performs Hogwild-style
//! racy updates on the shared model (lost updates tolerated).

use std::cell::UnsafeCell;
use std::io::Write;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{
    ns_gradients, ns_pair_objective, sgd_apply, softmax_corpus_objective, EmbeddingModel, PairBatch,
};
use crate::sampler::{build_noise_distribution, draw_negatives, NoiseDistribution, DEFAULT_POWER};
use crate::vocab::{
    build_vocabulary, discard_probability, extract_pairs, subsample, Corpus, Vocabulary,
};

/// Learning rate floor as a fraction of the initial rate.
const MIN_ALPHA_FRACTION: f64 = 1e-4;

/// Exact-softmax evaluation is refused above this vocabulary size.
const EXACT_SOFTMAX_MAX_VOCAB: usize = 10_000;

const PROGRESS_INTERVAL: u64 = 100_000;

#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub dim: usize,
    pub max_window: usize,
    /// Negatives per positive pair. 0 trains on positives only, which is
    /// useful solely to demonstrate the degenerate collapse.
    pub negatives: usize,
    pub min_count: u64,
    pub subsample: Option<f64>,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    pub workers: usize,
    pub exact_softmax_eval: bool,
    pub noise_power: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 100,
            max_window: 5,
            negatives: 5,
            min_count: 5,
            subsample: Some(1e-3),
            learning_rate: 0.025,
            epochs: 5,
            seed: 1,
            workers: 1,
            exact_softmax_eval: false,
            noise_power: DEFAULT_POWER,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, msg: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::Config(msg.to_owned()))
            }
        };
        check(self.dim >= 1, "dim must be >= 1")?;
        check(self.max_window >= 1, "window must be >= 1")?;
        check(self.min_count >= 1, "min-count must be >= 1")?;
        check(
            self.learning_rate > 0.0 && self.learning_rate.is_finite(),
            "alpha must be positive and finite",
        )?;
        check(self.epochs >= 1, "epochs must be >= 1")?;
        check(self.workers >= 1, "workers must be >= 1")?;
        if let Some(t) = self.subsample {
            check(t > 0.0 && t <= 1.0, "sample threshold must be in (0, 1]")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct TrainReport {
    pub pairs_processed: u64,
    pub final_learning_rate: f64,
    pub wall_time: Duration,
    /// Running average of per-batch NS objectives, one entry per epoch.
    pub epoch_objectives: Vec<f64>,
    /// Mean v_c . v_w over the positive pairs seen in each epoch.
    pub epoch_mean_positive_dot: Vec<f64>,
    /// Exact softmax objective per epoch, when enabled and the vocabulary
    /// is small enough.
    pub exact_softmax_objectives: Option<Vec<f64>>,
}

/// Expected number of SGD pairs for the whole run. Used only for the decay
/// schedule; accuracy within a constant factor suffices.
///
/// Per sentence of expected post-subsampling length L, a fixed window k'
/// yields 2k'L - k'^2 - k' pairs; this averages that over k' uniform on
/// 1..=k.
pub fn estimate_total_pairs(
    corpus: &Corpus,
    vocab: &Vocabulary,
    config: &TrainConfig,
) -> Result<f64> {
    let k = config.max_window as f64;
    // E[k'] and E[k'^2 + k'] for k' uniform on 1..=k
    let mean_window = (k + 1.0) / 2.0;
    let boundary_loss = (k + 1.0) * (2.0 * k + 1.0) / 6.0 + mean_window;

    let mut total = 0.0;
    corpus.for_each_line(|line| {
        let sentence = vocab.encode_line(line);
        let expected_len: f64 = match config.subsample {
            None => sentence.ids.len() as f64,
            Some(t) => sentence
                .ids
                .iter()
                .map(|&id| 1.0 - discard_probability(vocab, id, t))
                .sum(),
        };
        total += (2.0 * mean_window * expected_len - boundary_loss).max(0.0);
    })?;
    Ok(total * config.epochs as f64)
}

struct Schedule {
    initial: f64,
    total_pairs: f64,
}

impl Schedule {
    fn rate(&self, processed: u64) -> f64 {
        let remaining = 1.0 - processed as f64 / self.total_pairs.max(1.0);
        self.initial * remaining.max(MIN_ALPHA_FRACTION)
    }
}

fn worker_rng(seed: u64, worker: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(worker);
    rng
}

/// Trains a fresh model on the corpus. Returns the model together with a
/// report of what happened.
pub fn train(corpus: &Corpus, config: &TrainConfig) -> Result<(EmbeddingModel, TrainReport)> {
    config.validate()?;
    let vocab = build_vocabulary(corpus, config.min_count)?;
    train_with_vocab(corpus, &vocab, config)
}

/// As [`train`], but with a pre-built vocabulary.
pub fn train_with_vocab(
    corpus: &Corpus,
    vocab: &Vocabulary,
    config: &TrainConfig,
) -> Result<(EmbeddingModel, TrainReport)> {
    config.validate()?;
    if vocab.is_empty() {
        return Err(Error::EmptyVocabulary {
            min_count: config.min_count,
        });
    }
    let noise = if config.negatives > 0 {
        Some(build_noise_distribution(vocab, config.noise_power)?)
    } else {
        None
    };
    let schedule = Schedule {
        initial: config.learning_rate,
        total_pairs: estimate_total_pairs(corpus, vocab, config)?,
    };
    let mut init_rng = ChaCha8Rng::seed_from_u64(config.seed);
    let model = EmbeddingModel::init(vocab.len(), config.dim, &mut init_rng);

    let start = Instant::now();
    let (model, mut report) = if config.workers == 1 {
        train_sequential(corpus, vocab, config, noise.as_ref(), &schedule, model)?
    } else {
        train_hogwild(corpus, vocab, config, noise.as_ref(), &schedule, model)?
    };
    report.wall_time = start.elapsed();
    report.final_learning_rate = schedule.rate(report.pairs_processed);

    if !model.all_finite() {
        return Err(Error::NonFiniteParameter {
            pairs: report.pairs_processed,
        });
    }
    Ok((model, report))
}

fn train_sequential(
    corpus: &Corpus,
    vocab: &Vocabulary,
    config: &TrainConfig,
    noise: Option<&NoiseDistribution>,
    schedule: &Schedule,
    mut model: EmbeddingModel,
) -> Result<(EmbeddingModel, TrainReport)> {
    let exact_eval = config.exact_softmax_eval && vocab.len() <= EXACT_SOFTMAX_MAX_VOCAB;
    if config.exact_softmax_eval && !exact_eval {
        eprintln!(
            "exact softmax evaluation disabled: |V| = {} exceeds {}",
            vocab.len(),
            EXACT_SOFTMAX_MAX_VOCAB
        );
    }

    let mut rng = worker_rng(config.seed, 0);
    let mut report = TrainReport::default();
    let mut exact_objectives = Vec::new();
    let mut step_error = None;

    for _epoch in 0..config.epochs {
        let mut epoch_objective_sum = 0.0;
        let mut epoch_dot_sum = 0.0;
        let mut epoch_pairs = 0u64;
        let mut epoch_positives = Vec::new();

        corpus.for_each_line(|line| {
            if step_error.is_some() {
                return;
            }
            let sentence = vocab.encode_line(line);
            let sentence = subsample(&sentence, vocab, config.subsample, &mut rng);
            for positive in extract_pairs(&sentence, config.max_window, &mut rng) {
                let negatives = match noise {
                    Some(dist) => draw_negatives(positive, config.negatives, dist, &mut rng),
                    None => Vec::new(),
                };
                let batch = PairBatch {
                    positive,
                    negatives,
                };
                let rate = schedule.rate(report.pairs_processed);
                let gradients = ns_gradients(&model, &batch);
                if let Err(e) = sgd_apply(&mut model, &batch, &gradients, rate) {
                    step_error = Some(e);
                    return;
                }
                epoch_objective_sum += ns_pair_objective(&model, &batch);
                epoch_dot_sum += model.pair_dot(positive.word, positive.context);
                epoch_pairs += 1;
                report.pairs_processed += 1;
                if report.pairs_processed % PROGRESS_INTERVAL == 0 {
                    progress_line(report.pairs_processed, rate, &report);
                }
                if exact_eval {
                    epoch_positives.push(positive);
                }
            }
        })?;
        if let Some(e) = step_error.take() {
            return Err(e);
        }

        let denom = epoch_pairs.max(1) as f64;
        report.epoch_objectives.push(epoch_objective_sum / denom);
        report.epoch_mean_positive_dot.push(epoch_dot_sum / denom);
        if exact_eval {
            exact_objectives.push(softmax_corpus_objective(&model, &epoch_positives));
        }
        if !model.all_finite() {
            return Err(Error::NonFiniteParameter {
                pairs: report.pairs_processed,
            });
        }
    }

    if exact_eval {
        report.exact_softmax_objectives = Some(exact_objectives);
    }
    Ok((model, report))
}

fn progress_line(pairs: u64, rate: f64, report: &TrainReport) {
    let running = report.epoch_objectives.last().copied().unwrap_or(f64::NAN);
    let _ = writeln!(
        std::io::stderr(),
        "pairs {pairs}  alpha {rate:.6}  objective {running:.4}"
    );
}

/// Shared model for lock-free parallel updates (Niu et al.'s Hogwild
/// scheme): workers mutate the same parameter rows without mutual
/// exclusion and lost updates are tolerated.
struct HogwildModel(Arc<UnsafeCell<EmbeddingModel>>);

unsafe impl Send for HogwildModel {}
unsafe impl Sync for HogwildModel {}

impl Clone for HogwildModel {
    fn clone(&self) -> Self {
        HogwildModel(Arc::clone(&self.0))
    }
}

impl HogwildModel {
    #[allow(clippy::mut_from_ref)]
    fn get(&self) -> &mut EmbeddingModel {
        unsafe { &mut *self.0.get() }
    }
}

fn train_hogwild(
    corpus: &Corpus,
    vocab: &Vocabulary,
    config: &TrainConfig,
    noise: Option<&NoiseDistribution>,
    schedule: &Schedule,
    model: EmbeddingModel,
) -> Result<(EmbeddingModel, TrainReport)> {
    // materialize lines once so workers can own contiguous shards
    let mut lines = Vec::new();
    corpus.for_each_line(|line| lines.push(line.to_owned()))?;

    let shared = HogwildModel(Arc::new(UnsafeCell::new(model)));
    let workers = config.workers.min(lines.len().max(1));
    let chunk = lines.len().div_ceil(workers);
    let processed = std::sync::atomic::AtomicU64::new(0);

    std::thread::scope(|scope| {
        for (worker_id, shard) in lines.chunks(chunk).enumerate() {
            let shared = shared.clone();
            let processed = &processed;
            scope.spawn(move || {
                let mut rng = worker_rng(config.seed, worker_id as u64);
                for _epoch in 0..config.epochs {
                    for line in shard {
                        let sentence = vocab.encode_line(line);
                        let sentence = subsample(&sentence, vocab, config.subsample, &mut rng);
                        for positive in extract_pairs(&sentence, config.max_window, &mut rng) {
                            let negatives = match noise {
                                Some(dist) => {
                                    draw_negatives(positive, config.negatives, dist, &mut rng)
                                }
                                None => Vec::new(),
                            };
                            let batch = PairBatch {
                                positive,
                                negatives,
                            };
                            let model = shared.get();
                            let done =
                                processed.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                            let rate = schedule.rate(done);
                            let gradients = ns_gradients(model, &batch);
                            // racy by contract; a non-finite fragment here is
                            // dropped rather than aborting the whole run
                            let _ = sgd_apply(model, &batch, &gradients, rate);
                        }
                    }
                }
            });
        }
    });

    let pairs_processed = processed.into_inner();
    let model = Arc::try_unwrap(shared.0)
        .expect("all worker handles joined")
        .into_inner();
    let report = TrainReport {
        pairs_processed,
        ..TrainReport::default()
    };
    Ok((model, report))
}
