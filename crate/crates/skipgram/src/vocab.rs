//! Corpus pipeline: vocabulary construction, frequent-word subsampling, and
//! dynamic-window pair extraction.
//!
//! Tokenization is deliberately plain: whitespace-split, one sentence per
//! line, no case folding. Tokens pruned by `min_count` (or never seen) are
//! dropped when a sentence is encoded, and subsampled tokens are removed
//! before contexts are generated, so windows span removed words.

use std::cmp::Reverse;
use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;

use rand::Rng;

use crate::error::{Error, Result};

pub type WordId = usize;

/// A text corpus: one sentence per line, tokens separated by ASCII whitespace.
#[derive(Debug, Clone)]
pub enum Corpus {
    File(PathBuf),
    Memory(Vec<String>),
}

impl Corpus {
    pub fn from_path(path: impl Into<PathBuf>) -> Self {
        Corpus::File(path.into())
    }

    pub fn from_text(text: &str) -> Self {
        Corpus::Memory(text.lines().map(str::to_owned).collect())
    }

    /// Calls `f` once per line, in order. File corpora are re-read from disk
    /// on every call.
    pub fn for_each_line<F>(&self, mut f: F) -> Result<()>
    where
        F: FnMut(&str),
    {
        match self {
            Corpus::File(path) => {
                let file = File::open(path).map_err(|e| Error::io(path, e))?;
                for line in BufReader::new(file).lines() {
                    let line = line.map_err(|e| Error::io(path, e))?;
                    f(&line);
                }
            }
            Corpus::Memory(lines) => {
                for line in lines {
                    f(line);
                }
            }
        }
        Ok(())
    }
}

/// Word/context vocabulary with dense ids assigned by descending count,
/// ties broken lexicographically.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    words: Vec<String>,
    counts: Vec<u64>,
    total_tokens: u64,
    index: HashMap<String, WordId>,
}

impl Vocabulary {
    fn from_raw_counts(raw: HashMap<String, u64>, min_count: u64) -> Result<Self> {
        let mut retained: Vec<(String, u64)> = raw
            .into_iter()
            .filter(|&(_, count)| count >= min_count)
            .collect();
        if retained.is_empty() {
            return Err(Error::EmptyVocabulary { min_count });
        }
        retained.sort_by(|a, b| (Reverse(a.1), &a.0).cmp(&(Reverse(b.1), &b.0)));

        let mut words = Vec::with_capacity(retained.len());
        let mut counts = Vec::with_capacity(retained.len());
        let mut index = HashMap::with_capacity(retained.len());
        for (id, (word, count)) in retained.into_iter().enumerate() {
            index.insert(word.clone(), id);
            words.push(word);
            counts.push(count);
        }
        let total_tokens = counts.iter().sum();
        Ok(Vocabulary {
            words,
            counts,
            total_tokens,
            index,
        })
    }

    /// Builds a vocabulary directly from (word, count) pairs. Same id
    /// assignment rule as a corpus build.
    pub fn from_counts<I, S>(counts: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, u64)>,
        S: Into<String>,
    {
        let raw: HashMap<String, u64> = counts.into_iter().map(|(w, c)| (w.into(), c)).collect();
        Self::from_raw_counts(raw, 1)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn word(&self, id: WordId) -> &str {
        &self.words[id]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn count(&self, id: WordId) -> u64 {
        self.counts[id]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn id(&self, word: &str) -> Option<WordId> {
        self.index.get(word).copied()
    }

    /// Corpus frequency f(w) = count(w) / total_tokens.
    pub fn frequency(&self, id: WordId) -> f64 {
        self.counts[id] as f64 / self.total_tokens as f64
    }

    /// Encodes one line into ids, silently dropping out-of-vocabulary tokens.
    pub fn encode_line(&self, line: &str) -> Sentence {
        Sentence {
            ids: line
                .split_ascii_whitespace()
                .filter_map(|tok| self.id(tok))
                .collect(),
        }
    }

    /// Writes "word<TAB>count" lines in id (descending count) order.
    pub fn dump<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (word, count) in self.words.iter().zip(&self.counts) {
            writeln!(out, "{word}\t{count}")?;
        }
        Ok(())
    }
}

/// A sentence already encoded to vocabulary ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub ids: Vec<WordId>,
}

impl Sentence {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// One (word, context) pair extracted from the corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TrainingPair {
    pub word: WordId,
    pub context: WordId,
}

/// Counts every whitespace token in the corpus and keeps words with
/// frequency >= `min_count`.
pub fn build_vocabulary(corpus: &Corpus, min_count: u64) -> Result<Vocabulary> {
    let mut raw: HashMap<String, u64> = HashMap::new();
    corpus.for_each_line(|line| {
        for tok in line.split_ascii_whitespace() {
            *raw.entry(tok.to_owned()).or_insert(0) += 1;
        }
    })?;
    Vocabulary::from_raw_counts(raw, min_count)
}

/// Probability that one occurrence of word `id` is discarded under
/// threshold `t`: max(0, 1 - sqrt(t / f(w))).
pub fn discard_probability(vocab: &Vocabulary, id: WordId, t: f64) -> f64 {
    let f = vocab.frequency(id);
    (1.0 - (t / f).sqrt()).max(0.0)
}

/// Down-samples frequent words. Each occurrence is dropped independently;
/// surviving tokens keep their order. `t = None` disables subsampling.
pub fn subsample<R: Rng>(
    sentence: &Sentence,
    vocab: &Vocabulary,
    t: Option<f64>,
    rng: &mut R,
) -> Sentence {
    let Some(t) = t else {
        return sentence.clone();
    };
    let ids = sentence
        .ids
        .iter()
        .copied()
        .filter(|&id| {
            let p_discard = discard_probability(vocab, id, t);
            rng.random::<f64>() >= p_discard
        })
        .collect();
    Sentence { ids }
}

/// Samples the effective window size k' uniformly from 1..=max_window.
pub fn draw_window_size<R: Rng>(max_window: usize, rng: &mut R) -> usize {
    debug_assert!(max_window >= 1);
    rng.random_range(1..=max_window)
}

fn push_window_pairs(ids: &[WordId], focus: usize, window: usize, out: &mut Vec<TrainingPair>) {
    let lo = focus.saturating_sub(window);
    let hi = (focus + window).min(ids.len().saturating_sub(1));
    for j in lo..=hi {
        if j != focus {
            out.push(TrainingPair {
                word: ids[focus],
                context: ids[j],
            });
        }
    }
}

/// Emits (focus, context) pairs with a fresh k' per focus position.
/// Windows never cross the sentence boundary.
pub fn extract_pairs<R: Rng>(
    sentence: &Sentence,
    max_window: usize,
    rng: &mut R,
) -> Vec<TrainingPair> {
    let mut pairs = Vec::new();
    for i in 0..sentence.ids.len() {
        let window = draw_window_size(max_window, rng);
        push_window_pairs(&sentence.ids, i, window, &mut pairs);
    }
    pairs
}
