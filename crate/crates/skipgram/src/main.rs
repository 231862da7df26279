use std::io::Write;
use std::path::PathBuf;

use anyhow::Context;
use clap::{Parser, Subcommand};

use skipgram::{
    build_vocabulary, degenerate_demo, load_text, nearest_neighbors, save_text, Corpus, Space,
    TrainConfig, DEFAULT_POWER,
};

#[derive(Parser)]
#[command(name = "skipgram", about = "Skip-gram word embeddings with negative sampling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train embeddings on a text corpus (one sentence per line)
    Train {
        /// Training corpus file
        #[arg(long)]
        input: PathBuf,
        /// Where to write the embeddings (word2vec text format)
        #[arg(long)]
        output: PathBuf,
        /// Dimensionality of the vectors
        #[arg(long, default_value_t = 100)]
        size: usize,
        /// Maximal window size; the effective size is sampled per word
        #[arg(long, default_value_t = 5)]
        window: usize,
        /// Negative samples per positive pair (0 = positives only)
        #[arg(long, default_value_t = 5)]
        negative: usize,
        /// Discard words appearing fewer times than this
        #[arg(long, default_value_t = 5)]
        min_count: u64,
        /// Subsampling threshold for frequent words (0 = disabled)
        #[arg(long, default_value_t = 1e-3)]
        sample: f64,
        /// Initial learning rate
        #[arg(long, default_value_t = 0.025)]
        alpha: f64,
        #[arg(long, default_value_t = 5)]
        epochs: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Parallel workers; values above 1 trade determinism for speed
        #[arg(long, default_value_t = 1)]
        threads: usize,
        /// Report the exact softmax objective per epoch (small vocabularies)
        #[arg(long)]
        exact_softmax_eval: bool,
    },
    /// Print the nearest neighbors of a word from a saved model
    Similar {
        /// Embedding file in word2vec text format
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        word: String,
        /// How many neighbors to print
        #[arg(long, default_value_t = 10)]
        top: usize,
    },
    /// Show the degenerate all-vectors-equal solution at a given dot product
    DemoCollapse {
        /// Shared dot product K of the all-equal model
        #[arg(long, default_value_t = 40.0)]
        k_value: f64,
        /// Number of positive pairs the objective is summed over
        #[arg(long, default_value_t = 1000)]
        pairs: u64,
        /// Dimensionality of the constructed vectors
        #[arg(long, default_value_t = 10)]
        size: usize,
    },
    /// Build and dump the vocabulary of a corpus
    Vocab {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 5)]
        min_count: u64,
        /// Write "word<TAB>count" lines here instead of standard output
        #[arg(long)]
        dump: Option<PathBuf>,
    },
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Train {
            input,
            output,
            size,
            window,
            negative,
            min_count,
            sample,
            alpha,
            epochs,
            seed,
            threads,
            exact_softmax_eval,
        } => {
            let config = TrainConfig {
                dim: size,
                max_window: window,
                negatives: negative,
                min_count,
                subsample: (sample > 0.0).then_some(sample),
                learning_rate: alpha,
                epochs,
                seed,
                workers: threads,
                exact_softmax_eval,
                noise_power: DEFAULT_POWER,
            };
            let corpus = Corpus::from_path(&input);
            let vocab = build_vocabulary(&corpus, min_count)
                .with_context(|| format!("building vocabulary from {}", input.display()))?;
            eprintln!(
                "vocabulary: {} words, {} tokens",
                vocab.len(),
                vocab.total_tokens()
            );
            let (model, report) = skipgram::train_with_vocab(&corpus, &vocab, &config)?;
            eprintln!(
                "trained on {} pairs in {:.1?}, final alpha {:.6}",
                report.pairs_processed, report.wall_time, report.final_learning_rate
            );
            for (epoch, obj) in report.epoch_objectives.iter().enumerate() {
                eprintln!("epoch {}: running objective {obj:.4}", epoch + 1);
            }
            if let Some(exact) = &report.exact_softmax_objectives {
                for (epoch, obj) in exact.iter().enumerate() {
                    eprintln!("epoch {}: exact softmax objective {obj:.4}", epoch + 1);
                }
            }
            save_text(&model, vocab.words(), &output)
                .with_context(|| format!("writing {}", output.display()))?;
        }
        Command::Similar { model, word, top } => {
            let (embeddings, words) = load_text(&model)?;
            let results = nearest_neighbors(&embeddings, &words, &word, top, Space::Word)?;
            let stdout = std::io::stdout();
            let mut out = stdout.lock();
            for r in results {
                writeln!(out, "{}\t{:.6}", r.word, r.score)?;
            }
        }
        Command::DemoCollapse {
            k_value,
            pairs,
            size,
        } => {
            let (_, report) = degenerate_demo(size, k_value, pairs);
            println!("shared dot product: {}", report.dot);
            println!("per-pair p(D=1|w,c) = sigma(K) = {:.17}", report.per_pair_probability);
            println!(
                "positives-only objective over {} pairs: {:e}",
                report.pairs, report.positives_only_objective
            );
        }
        Command::Vocab {
            input,
            min_count,
            dump,
        } => {
            let vocab = build_vocabulary(&Corpus::from_path(&input), min_count)?;
            match dump {
                Some(path) => {
                    let file = std::fs::File::create(&path)
                        .with_context(|| format!("creating {}", path.display()))?;
                    vocab.dump(std::io::BufWriter::new(file))?;
                }
                None => vocab.dump(std::io::stdout().lock())?,
            }
        }
    }
    Ok(())
}
