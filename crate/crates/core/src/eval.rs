//! Word-similarity benchmark evaluation (Spearman's ρ against human
//! judgments) and nearest-neighbor inspection.
//!
//! Model score for a word pair is the cosine of the two vectors; ρ is the
//! Pearson correlation of tie-averaged ranks between model scores and the
//! human scores. Pairs with an out-of-vocabulary word are skipped and
//! reported by default; a zero-substitution policy is available for
//! sensitivity analysis.

use std::path::Path;

use rayon::prelude::*;

use crate::embedding::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::linalg::cosine;

/// A named list of (word, word, human score) triples.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityDataset {
    pub name: String,
    pub pairs: Vec<(String, String, f64)>,
}

/// Outcome of evaluating one dataset against one embedding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalReport {
    pub rho: f64,
    pub pairs_used: usize,
    pub pairs_oov: usize,
}

/// What to do with a pair whose words are not all in the vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OovPolicy {
    /// Drop the pair and count it in `pairs_oov`.
    #[default]
    Skip,
    /// Substitute a zero vector: the pair scores 0 and counts as used.
    Zero,
}

/// Read a dataset file: one `word1 word2 score` triple per line
/// (whitespace- or tab-separated). A first line whose third token is not
/// a number is treated as a header and skipped. The dataset name is the
/// file stem.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<SimilarityDataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());

    let err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };

    let mut pairs = Vec::new();
    let mut first_content_line = true;
    for (lineno0, raw) in text.lines().enumerate() {
        let lineno = lineno0 + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != 3 {
            return Err(err(
                lineno,
                format!("expected `word1 word2 score`, found {} tokens", tokens.len()),
            ));
        }
        let score: std::result::Result<f64, _> = tokens[2].parse();
        match score {
            Err(_) if first_content_line => {
                // Header row such as `word1	word2	score`.
                first_content_line = false;
                continue;
            }
            Err(_) => {
                return Err(err(lineno, format!("unparseable score {:?}", tokens[2])));
            }
            Ok(s) if !s.is_finite() => {
                return Err(err(lineno, format!("non-finite score {:?}", tokens[2])));
            }
            Ok(s) => {
                pairs.push((tokens[0].to_string(), tokens[1].to_string(), s));
            }
        }
        first_content_line = false;
    }

    if pairs.len() < 2 {
        return Err(Error::EmptyInput(format!(
            "{} has {} scored pairs; need at least 2 for correlation",
            path.display(),
            pairs.len()
        )));
    }
    Ok(SimilarityDataset { name, pairs })
}

/// Tie-averaged ranks: a run of equal values spanning sorted positions
/// `L+1 ..= L+T` (1-based) all receive rank `L + (T + 1) / 2`.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite values"));

    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let below = i;
        let ties = j - i + 1;
        let rank = below as f64 + (ties as f64 + 1.0) / 2.0;
        for &original in &order[i..=j] {
            ranks[original] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman's ρ: Pearson correlation of tie-averaged ranks.
///
/// Errors when either side is constant (the correlation is undefined).
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "score lists have lengths {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::InvalidParam(
            "correlation needs at least 2 observations".into(),
        ));
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite score in correlation input".into()));
    }

    let rx = average_ranks(x);
    let ry = average_ranks(y);

    let n = rx.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for i in 0..rx.len() {
        let dx = rx[i] - mx;
        let dy = ry[i] - my;
        cov += dx * dy;
        vx += dx * dx;
        vy += dy * dy;
    }
    if vx == 0.0 || vy == 0.0 {
        return Err(Error::Degenerate(
            "correlation undefined: one input is constant".into(),
        ));
    }
    Ok((cov / (vx * vy).sqrt()).clamp(-1.0, 1.0))
}

/// Score every pair of `dataset` against `w` under the default
/// skip-and-report OOV policy.
pub fn evaluate(w: &EmbeddingMatrix, dataset: &SimilarityDataset) -> Result<EvalReport> {
    evaluate_with_policy(w, dataset, OovPolicy::Skip)
}

/// Like [`evaluate`], with an explicit OOV policy.
pub fn evaluate_with_policy(
    w: &EmbeddingMatrix,
    dataset: &SimilarityDataset,
    policy: OovPolicy,
) -> Result<EvalReport> {
    let total = dataset.pairs.len();
    let mut model = Vec::with_capacity(total);
    let mut human = Vec::with_capacity(total);
    let mut pairs_oov = 0usize;

    for (w1, w2, score) in &dataset.pairs {
        match (w.vector(w1), w.vector(w2)) {
            (Some(u), Some(v)) => {
                model.push(cosine(u, v)?);
                human.push(*score);
            }
            _ => match policy {
                OovPolicy::Skip => pairs_oov += 1,
                OovPolicy::Zero => {
                    model.push(0.0);
                    human.push(*score);
                }
            },
        }
    }

    let pairs_used = model.len();
    if pairs_used < 2 {
        return Err(Error::EmptyInput(format!(
            "dataset {}: only {pairs_used} of {total} pairs usable ({pairs_oov} OOV); need at least 2",
            dataset.name
        )));
    }
    Ok(EvalReport {
        rho: spearman(&model, &human)?,
        pairs_used,
        pairs_oov,
    })
}

/// Top-`k` in-vocabulary words by cosine against `word`, excluding the cue
/// itself, cosine ties broken by vocabulary order. Zero-norm rows cannot be
/// ranked and are left out.
pub fn neighbors(w: &EmbeddingMatrix, word: &str, k: usize) -> Result<Vec<(String, f64)>> {
    let cue_idx = w
        .vocab()
        .index_of(word)
        .ok_or_else(|| Error::WordNotFound(word.to_string()))?;
    if k == 0 {
        return Ok(Vec::new());
    }
    let cue = w.row(cue_idx);
    if cue.dot(&cue) == 0.0 {
        return Err(Error::Numerical(format!(
            "cue word {word:?} has a zero vector; cosine is undefined"
        )));
    }

    let mut scored: Vec<(usize, f64)> = (0..w.len())
        .into_par_iter()
        .filter(|&i| i != cue_idx)
        .filter_map(|i| cosine(cue, w.row(i)).ok().map(|c| (i, c)))
        .collect();
    scored.sort_unstable_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .expect("cosines are finite")
            .then(a.0.cmp(&b.0))
    });
    scored.truncate(k);
    Ok(scored
        .into_iter()
        .map(|(i, c)| (w.vocab().word(i).to_string(), c))
        .collect())
}
