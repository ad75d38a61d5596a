//! Unsupervised extrofitting: mine related-word classes from an embedding
//! itself — no lexicon required — and extrofit with them.
//!
//! Words are mapped into a k-dimensional latent space (`U_k S_k` from the
//! truncated SVD), and any two words whose latent vectors have cosine
//! similarity at or above a threshold are declared related. The transitive
//! closure of that relation partitions the vocabulary into classes, which
//! then drive a regular extrofitting pass. Classes may be mined from a
//! different pretrained embedding (the "resource") and applied to the
//! embedding being enriched over their shared vocabulary.

use std::sync::Arc;

use ndarray::{s, Array2};
use rayon::prelude::*;

use crate::embedding::{EmbeddingMatrix, Vocab};
use crate::error::{Error, Result};
use crate::extrofit::{extrofit, ExtrofitOptions};
use crate::lexicon::ClassAssignment;
use crate::linalg::{block_ranges, truncated_svd};
use crate::union_find::UnionFind;

/// Rows per tile in the blocked all-pairs similarity scan.
const TILE: usize = 512;

/// Parameters for class mining.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnsupConfig {
    /// Dimensionality k of the latent space (1 ≤ k ≤ d).
    pub latent_dim: usize,
    /// Cosine threshold T in (0, 1] above which two words are related.
    /// Kept high by default so only near-duplicates merge.
    pub threshold: f64,
    /// Cap on accepted related words per word; a safety valve against
    /// degenerate embeddings with huge near-duplicate sets.
    pub max_candidates: usize,
}

impl Default for UnsupConfig {
    fn default() -> Self {
        UnsupConfig {
            latent_dim: 100,
            threshold: 0.9,
            max_candidates: 100,
        }
    }
}

fn validate_config(config: &UnsupConfig) -> Result<()> {
    if !(config.threshold > 0.0 && config.threshold <= 1.0) {
        return Err(Error::InvalidParam(format!(
            "threshold {} outside (0, 1]",
            config.threshold
        )));
    }
    if config.latent_dim == 0 {
        return Err(Error::InvalidParam("latent dimension must be ≥ 1".into()));
    }
    if config.max_candidates == 0 {
        return Err(Error::InvalidParam("max_candidates must be ≥ 1".into()));
    }
    Ok(())
}

/// Word representations in latent space: rows of `U_k` scaled column-wise
/// by the singular values. Same vocabulary, dimension k.
pub fn latent_vectors(w: &EmbeddingMatrix, k: usize) -> Result<EmbeddingMatrix> {
    let svd = truncated_svd(w.matrix(), k)?;
    let mut latent = svd.u;
    for (j, &s) in svd.singular_values.iter().enumerate() {
        latent.column_mut(j).mapv_inplace(|v| v * s);
    }
    w.with_matrix(latent)
}

/// Partition the vocabulary by latent similarity: every pair with cosine
/// ≥ threshold is merged (transitively); everything else stays a
/// singleton. Zero-norm rows never match anything.
///
/// The scan computes exact cosines tile-by-tile over unit-normalized rows;
/// candidate pairs are accepted in ascending `(i, j)` order per tile row,
/// honoring `max_candidates`, so the result is deterministic regardless of
/// parallelism.
pub fn related_classes(
    w_latent: &EmbeddingMatrix,
    config: &UnsupConfig,
) -> Result<ClassAssignment> {
    validate_config(config)?;
    let n = w_latent.len();
    let x = w_latent.matrix();

    let mut unit = x.clone();
    for mut row in unit.rows_mut() {
        let norm = row.dot(&row).sqrt();
        if norm > 0.0 {
            row.mapv_inplace(|v| v / norm);
        }
        // zero rows stay zero: their dot with anything is 0 < threshold
    }

    let tiles = block_ranges(n, TILE);
    let mut uf = UnionFind::new(n);
    let mut accepted = vec![0usize; n];

    for (ti, &(ilo, ihi)) in tiles.iter().enumerate() {
        let xi = unit.slice(s![ilo..ihi, ..]);
        let hit_lists: Vec<Vec<(usize, usize)>> = tiles[ti..]
            .par_iter()
            .map(|&(jlo, jhi)| {
                let xj = unit.slice(s![jlo..jhi, ..]);
                let products = xi.dot(&xj.t());
                let mut hits = Vec::new();
                for (a, gi) in (ilo..ihi).enumerate() {
                    for (b, gj) in (jlo..jhi).enumerate() {
                        if gj > gi && products[(a, b)] >= config.threshold {
                            hits.push((gi, gj));
                        }
                    }
                }
                hits
            })
            .collect();

        let mut row_hits: Vec<(usize, usize)> = hit_lists.concat();
        row_hits.sort_unstable();
        for (i, j) in row_hits {
            if accepted[i] < config.max_candidates && accepted[j] < config.max_candidates {
                accepted[i] += 1;
                accepted[j] += 1;
                uf.union(i, j);
            }
        }
    }

    Ok(ClassAssignment::from_union_find(&mut uf, n))
}

/// Enrich `w` with classes mined from `resource`.
///
/// The resource is restricted to the vocabulary it shares with `w`
/// (classes are mined there); words of `w` missing from the resource
/// become singletons. Passing `w` itself as the resource mines the
/// classes from the embedding being enriched.
pub fn unsup_extrofit(
    w: &EmbeddingMatrix,
    resource: &EmbeddingMatrix,
    config: &UnsupConfig,
) -> Result<EmbeddingMatrix> {
    validate_config(config)?;

    let shared: Vec<usize> = (0..w.len())
        .filter(|&i| resource.vocab().contains(w.vocab().word(i)))
        .collect();
    if shared.is_empty() {
        return Err(Error::EmptyInput(
            "embedding and resource share no vocabulary".into(),
        ));
    }

    let mut restricted = Array2::zeros((shared.len(), resource.dim()));
    let mut shared_words = Vec::with_capacity(shared.len());
    for (r, &i) in shared.iter().enumerate() {
        let word = w.vocab().word(i);
        restricted
            .row_mut(r)
            .assign(&resource.vector(word).expect("word is shared"));
        shared_words.push(word.to_string());
    }
    let restricted = EmbeddingMatrix::new(Arc::new(Vocab::new(shared_words)?), restricted)?;

    let latent = latent_vectors(&restricted, config.latent_dim)?;
    let local = related_classes(&latent, config)?;

    let mut labels = vec![usize::MAX; w.len()];
    for (r, &i) in shared.iter().enumerate() {
        labels[i] = local.class_of(r);
    }
    let mut next = local.num_classes();
    for label in labels.iter_mut() {
        if *label == usize::MAX {
            *label = next;
            next += 1;
        }
    }
    let classes = ClassAssignment::from_labels(&labels);

    extrofit(w, &classes, &ExtrofitOptions::default())
}
