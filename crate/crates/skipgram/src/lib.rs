//! Skip-gram word embeddings trained with negative sampling, plus an
//! exact-softmax evaluation path and query tools sized for desk-scale
//! verification.
//!
//! The pipeline mirrors word2vec's corpus handling: min-count pruning,
//! frequent-word subsampling applied before context generation, and
//! dynamic context windows. Negatives are drawn from the unigram
//! distribution raised to the 3/4 power.

pub mod error;
pub mod io;
pub mod model;
pub mod query;
pub mod sampler;
pub mod trainer;
pub mod vocab;

pub use error::{Error, Result};
pub use io::{load_text, save_text};
pub use model::{
    log_sigmoid, ns_corpus_objective, ns_gradients, ns_pair_objective, sgd_apply, sigmoid,
    softmax_corpus_objective, softmax_prob, EmbeddingModel, NsGradients, PairBatch,
};
pub use query::{
    cosine, cosine_flagged, degenerate_demo, nearest_neighbors, CollapseReport, NeighborResult,
    Space,
};
pub use sampler::{
    build_noise_distribution, draw_negatives, NoiseDistribution, DEFAULT_POWER,
    REJECTION_RETRY_CAP,
};
pub use trainer::{estimate_total_pairs, train, train_with_vocab, TrainConfig, TrainReport};
pub use vocab::{
    build_vocabulary, discard_probability, draw_window_size, extract_pairs, subsample, Corpus,
    Sentence, TrainingPair, Vocabulary, WordId,
};
