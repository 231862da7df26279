//! Post-training analysis: cosine similarity, nearest neighbors, and the
//! degenerate-solution demonstrator.

use crate::error::{Error, Result};
use crate::model::{log_sigmoid, sigmoid, EmbeddingModel};
use crate::vocab::WordId;

/// Which parameter block similarity operates on. Word space is the usual
/// choice; context space is exposed because contexts sharing many words
/// end up similar too.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Space {
    #[default]
    Word,
    Context,
}

fn row(model: &EmbeddingModel, space: Space, id: WordId) -> &[f64] {
    match space {
        Space::Word => model.word_row(id),
        Space::Context => model.context_row(id),
    }
}

/// Cosine similarity plus a flag set when either vector is zero (the
/// similarity is then defined as 0 rather than an error).
pub fn cosine_flagged(model: &EmbeddingModel, space: Space, a: WordId, b: WordId) -> (f64, bool) {
    let va = row(model, space, a);
    let vb = row(model, space, b);
    let norm_a = va.iter().map(|x| x * x).sum::<f64>().sqrt();
    let norm_b = vb.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm_a == 0.0 || norm_b == 0.0 {
        return (0.0, true);
    }
    let dot: f64 = va.iter().zip(vb).map(|(x, y)| x * y).sum();
    (dot / (norm_a * norm_b), false)
}

/// Cosine over word vectors.
pub fn cosine(model: &EmbeddingModel, a: WordId, b: WordId) -> f64 {
    cosine_flagged(model, Space::Word, a, b).0
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeighborResult {
    pub word: String,
    pub score: f64,
}

/// Top-`top_n` words by cosine to `query`, query itself excluded. Sorted
/// by descending score; ties break lexicographically.
pub fn nearest_neighbors(
    model: &EmbeddingModel,
    words: &[String],
    query: &str,
    top_n: usize,
    space: Space,
) -> Result<Vec<NeighborResult>> {
    let query_id = words
        .iter()
        .position(|w| w == query)
        .ok_or_else(|| Error::WordNotFound(query.to_owned()))?;

    let mut scored: Vec<NeighborResult> = (0..words.len())
        .filter(|&id| id != query_id)
        .map(|id| NeighborResult {
            word: words[id].clone(),
            score: cosine_flagged(model, space, query_id, id).0,
        })
        .collect();
    scored.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap()
            .then_with(|| a.word.cmp(&b.word))
    });
    scored.truncate(top_n);
    Ok(scored)
}

/// What the all-equal model looks like: every vector is the same u with
/// u . u = K, so every pair reports the same membership probability.
#[derive(Debug, Clone)]
pub struct CollapseReport {
    pub dot: f64,
    pub per_pair_probability: f64,
    pub positives_only_objective: f64,
    pub pairs: u64,
}

/// Builds the degenerate model (all rows of W and C equal, shared dot K)
/// and evaluates it on `pairs` positive examples.
pub fn degenerate_demo(dim: usize, k_value: f64, pairs: u64) -> (EmbeddingModel, CollapseReport) {
    assert!(dim >= 1);
    let u = (k_value / dim as f64).sqrt();
    let mut model = EmbeddingModel::zeros(2, dim);
    for id in 0..model.vocab_size() {
        model.word_row_mut(id).fill(u);
        model.context_row_mut(id).fill(u);
    }
    let dot = model.pair_dot(0, 1);
    let report = CollapseReport {
        dot,
        per_pair_probability: sigmoid(dot),
        positives_only_objective: pairs as f64 * log_sigmoid(dot),
        pairs,
    };
    (model, report)
}
