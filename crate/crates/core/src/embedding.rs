//! Loading, storing and saving of word embedding matrices.
//!
//! The on-disk format is the plain text layout popularised by GloVe: one word
//! per line, followed by its vector components, all separated by single
//! spaces. An optional first line holding exactly two integers (vocabulary
//! size and dimensionality) is recognised and skipped, which makes word2vec
//! text files loadable as well.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use ndarray::{Array2, ArrayView1};

use crate::error::{Error, Result};

/// Immutable vocabulary: a list of words plus the reverse index.
///
/// Words are compared byte-for-byte; no case folding or Unicode
/// normalisation is applied anywhere.
#[derive(Debug)]
pub struct Vocab {
    words: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocab {
    /// Build a vocabulary from a list of distinct words.
    pub fn new(words: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::InvalidParam(format!(
                    "duplicate word {w:?} in vocabulary"
                )));
            }
        }
        Ok(Vocab { words, index })
    }

    /// Position of `word`, if present.
    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    /// Word at position `i`. Panics if out of range.
    pub fn word(&self, i: usize) -> &str {
        &self.words[i]
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Words in index order.
    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }
}

/// A vocabulary together with one row vector per word.
///
/// The vocabulary is shared behind an [`Arc`] so that derived matrices
/// (the output of an enrichment pass, say) reuse it without copying.
#[derive(Debug, Clone)]
pub struct EmbeddingMatrix {
    vocab: Arc<Vocab>,
    matrix: Array2<f64>,
}

/// Bookkeeping from [`load_embeddings`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LoadStats {
    /// Data rows read from the file (excluding any header line).
    pub rows_read: usize,
    /// Rows dropped because their word was already seen; the first
    /// occurrence wins.
    pub duplicates: usize,
}

impl EmbeddingMatrix {
    /// Assemble a matrix from parallel lists of words and row vectors.
    ///
    /// All rows must have the same length and the words must be distinct.
    pub fn from_rows(words: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        if words.len() != rows.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} words but {} rows",
                words.len(),
                rows.len()
            )));
        }
        let dim = rows.first().map_or(0, Vec::len);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} components, expected {dim}",
                    r.len()
                )));
            }
        }
        let n = rows.len();
        let flat: Vec<f64> = rows.into_iter().flatten().collect();
        let matrix = Array2::from_shape_vec((n, dim), flat)
            .expect("shape checked above");
        Ok(EmbeddingMatrix {
            vocab: Arc::new(Vocab::new(words)?),
            matrix,
        })
    }

    /// Pair an existing (shared) vocabulary with a freshly computed matrix.
    pub fn new(vocab: Arc<Vocab>, matrix: Array2<f64>) -> Result<Self> {
        if matrix.nrows() != vocab.len() {
            return Err(Error::DimensionMismatch(format!(
                "matrix has {} rows but vocabulary holds {} words",
                matrix.nrows(),
                vocab.len()
            )));
        }
        Ok(EmbeddingMatrix { vocab, matrix })
    }

    /// Same vocabulary, different data. The row count must be unchanged.
    pub fn with_matrix(&self, matrix: Array2<f64>) -> Result<Self> {
        Self::new(Arc::clone(&self.vocab), matrix)
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    /// Shared handle to the vocabulary.
    pub fn vocab_arc(&self) -> Arc<Vocab> {
        Arc::clone(&self.vocab)
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }

    /// Number of words.
    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    /// Dimensionality of the vectors.
    pub fn dim(&self) -> usize {
        self.matrix.ncols()
    }

    /// Row vector at position `i`. Panics if out of range.
    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.matrix.row(i)
    }

    /// Vector for `word`, if the word is known.
    pub fn vector(&self, word: &str) -> Option<ArrayView1<'_, f64>> {
        self.vocab.index_of(word).map(|i| self.matrix.row(i))
    }
}

/// Returns true if the line looks like a word2vec-style size header:
/// exactly two tokens, both non-negative integers.
fn is_header(line: &str) -> bool {
    let mut tokens = line.split_whitespace();
    match (tokens.next(), tokens.next(), tokens.next()) {
        (Some(a), Some(b), None) => {
            a.parse::<usize>().is_ok() && b.parse::<usize>().is_ok()
        }
        _ => false,
    }
}

/// Read a text-format embedding file.
///
/// The dimensionality is fixed by the first data row; any later row with a
/// different number of components is a parse error. Duplicate words keep
/// their first vector and are counted in [`LoadStats::duplicates`]. Blank
/// lines are not allowed. A file with no data rows is an error.
pub fn load_embeddings(path: impl AsRef<Path>) -> Result<(EmbeddingMatrix, LoadStats)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let reader = BufReader::new(file);

    let mut words: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut data: Vec<f64> = Vec::new();
    let mut dim: Option<usize> = None;
    let mut stats = LoadStats::default();

    let parse_err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };

    for (lineno0, line) in reader.lines().enumerate() {
        let lineno = lineno0 + 1;
        let line = line.map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let line = line.strip_suffix('\r').unwrap_or(&line);

        if lineno == 1 && is_header(line) {
            continue;
        }

        let mut tokens = line.split_whitespace();
        let word = tokens
            .next()
            .ok_or_else(|| parse_err(lineno, "blank line".to_string()))?;

        let mut row: Vec<f64> = Vec::with_capacity(dim.unwrap_or(0));
        for tok in tokens {
            let v: f64 = tok.parse().map_err(|_| {
                parse_err(lineno, format!("cannot parse {tok:?} as a number"))
            })?;
            row.push(v);
        }

        match dim {
            None => {
                if row.is_empty() {
                    return Err(parse_err(
                        lineno,
                        format!("word {word:?} has no vector components"),
                    ));
                }
                dim = Some(row.len());
            }
            Some(d) if row.len() != d => {
                return Err(parse_err(
                    lineno,
                    format!("expected {d} components, found {}", row.len()),
                ));
            }
            _ => {}
        }

        stats.rows_read += 1;
        if index.contains_key(word) {
            stats.duplicates += 1;
            continue;
        }
        index.insert(word.to_string(), words.len());
        words.push(word.to_string());
        data.extend_from_slice(&row);
    }

    let dim = dim.ok_or_else(|| {
        Error::EmptyInput(format!("no embedding rows in {}", path.display()))
    })?;
    let n = words.len();
    let matrix = Array2::from_shape_vec((n, dim), data)
        .expect("row lengths validated during parsing");
    Ok((
        EmbeddingMatrix {
            vocab: Arc::new(Vocab { words, index }),
            matrix,
        },
        stats,
    ))
}

/// Write `emb` in the same text format: one word per line followed by its
/// components with six decimal places, LF line endings, no header.
pub fn save_embeddings(emb: &EmbeddingMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if emb.is_empty() {
        return Err(Error::EmptyInput(format!(
            "nothing to write to {}",
            path.display()
        )));
    }
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    let mut out = BufWriter::new(file);
    for i in 0..emb.len() {
        out.write_all(emb.vocab.word(i).as_bytes()).map_err(io_err)?;
        for v in emb.row(i) {
            write!(out, " {v:.6}").map_err(io_err)?;
        }
        out.write_all(b"\n").map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}
