//! Embedding persistence in the word2vec-compatible text format.
//!
//! First line: "<vocab size> <dimension>". Then one line per word:
//! the word followed by its d vector components, space-separated.
//! Values are written with Rust's shortest round-trip float formatting,
//! so save followed by load is bit-lossless. Only word vectors are
//! persisted; context vectors are a training-time artifact.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::EmbeddingModel;

pub fn save_text(model: &EmbeddingModel, words: &[String], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    assert_eq!(model.vocab_size(), words.len(), "model/vocabulary mismatch");
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let write = |out: &mut BufWriter<File>, s: &str| {
        out.write_all(s.as_bytes()).map_err(|e| Error::io(path, e))
    };

    write(&mut out, &format!("{} {}\n", words.len(), model.dim()))?;
    for (id, word) in words.iter().enumerate() {
        let mut line = String::with_capacity(16 * model.dim());
        line.push_str(word);
        for v in model.word_row(id) {
            line.push(' ');
            line.push_str(&v.to_string());
        }
        line.push('\n');
        write(&mut out, &line)?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Reads a text-format embedding file back into word vectors (context
/// vectors come back zero) and the word list in file order.
pub fn load_text(path: impl AsRef<Path>) -> Result<(EmbeddingModel, Vec<String>)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines().enumerate();

    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::format(path, 1, "empty file"))?;
    let header = header.map_err(|e| Error::io(path, e))?;
    let mut parts = header.split_ascii_whitespace();
    let parse_dim = |field: Option<&str>, name: &str| -> Result<usize> {
        field
            .ok_or_else(|| Error::format(path, 1, format!("header missing {name}")))?
            .parse()
            .map_err(|_| Error::format(path, 1, format!("header has non-numeric {name}")))
    };
    let vocab_size = parse_dim(parts.next(), "vocabulary size")?;
    let dim = parse_dim(parts.next(), "dimension")?;
    if parts.next().is_some() {
        return Err(Error::format(path, 1, "header has trailing fields"));
    }

    let mut model = EmbeddingModel::zeros(vocab_size, dim);
    let mut words = Vec::with_capacity(vocab_size);
    let mut seen = HashSet::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.is_empty() {
            continue;
        }
        if words.len() == vocab_size {
            return Err(Error::format(
                path,
                line_no,
                format!("more than {vocab_size} rows"),
            ));
        }
        let mut fields = line.split_ascii_whitespace();
        let word = fields
            .next()
            .ok_or_else(|| Error::format(path, line_no, "blank row"))?;
        if !seen.insert(word.to_owned()) {
            return Err(Error::format(path, line_no, format!("duplicate word {word:?}")));
        }
        let id = words.len();
        let row = model.word_row_mut(id);
        let mut count = 0;
        for field in fields {
            if count == dim {
                return Err(Error::format(
                    path,
                    line_no,
                    format!("row has more than {dim} values"),
                ));
            }
            row[count] = field.parse().map_err(|_| {
                Error::format(path, line_no, format!("non-numeric value {field:?}"))
            })?;
            count += 1;
        }
        if count != dim {
            return Err(Error::format(
                path,
                line_no,
                format!("row has {count} values, expected {dim}"),
            ));
        }
        words.push(word.to_owned());
    }
    if words.len() != vocab_size {
        return Err(Error::format(
            path,
            0,
            format!("header promised {vocab_size} rows, found {}", words.len()),
        ));
    }
    Ok((model, words))
}
