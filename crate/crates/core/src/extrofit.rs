//! Extrofitting: enrich word vectors with a synonym-derived extra
//! dimension, then project through a transform that pulls classes apart.
//!
//! The pass has three stages:
//!
//! 1. **Expand** — append one enrichment value per word: the mean, over
//!    the word's class, of each member's per-element average. Words in a
//!    shared class therefore receive the same appended value, seeding
//!    within-class agreement; singletons append their own average.
//! 2. **Transform** — find directions maximizing between-class over
//!    within-class scatter of the expanded matrix (a generalized
//!    eigenproblem, regularized by shrinkage).
//! 3. **Project** — map every expanded row through the top `out_dim`
//!    directions, by default restoring the input dimensionality.

use ndarray::{Array1, Array2, Axis};

use crate::embedding::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::lexicon::ClassAssignment;
use crate::linalg::{
    discriminant_directions, par_matmul, scatter_matrices, BetweenWeighting,
};

/// Knobs for [`extrofit`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtrofitOptions {
    /// Output dimensionality; `None` keeps the input dimensionality.
    /// May be at most d+1 (the expanded width).
    pub out_dim: Option<usize>,
    /// Shrinkage of the within-class scatter toward a scaled identity,
    /// in [0, 1]. Keeps the metric invertible when most classes are
    /// singletons.
    pub shrinkage: f64,
    /// Weighting of class means in the between-class scatter.
    pub between_weighting: BetweenWeighting,
}

impl Default for ExtrofitOptions {
    fn default() -> Self {
        ExtrofitOptions {
            out_dim: None,
            shrinkage: 0.1,
            between_weighting: BetweenWeighting::SizeWeighted,
        }
    }
}

/// Append the enrichment dimension: for each word, the mean over its
/// class members of their per-word element means. Output is N×(d+1).
pub fn expand(w: &EmbeddingMatrix, classes: &ClassAssignment) -> Result<EmbeddingMatrix> {
    if w.is_empty() {
        return Err(Error::EmptyInput("cannot expand an empty vocabulary".into()));
    }
    if classes.len() != w.len() {
        return Err(Error::DimensionMismatch(format!(
            "class assignment covers {} words but vocabulary holds {}",
            classes.len(),
            w.len()
        )));
    }

    let n = w.len();
    let d = w.dim();
    let word_means: Array1<f64> = w.matrix().mean_axis(Axis(1)).expect("d ≥ 1");

    let mut class_sums = vec![0.0f64; classes.num_classes()];
    for i in 0..n {
        class_sums[classes.class_of(i)] += word_means[i];
    }
    let sizes = classes.class_sizes();

    let mut out = Array2::zeros((n, d + 1));
    out.slice_mut(ndarray::s![.., ..d]).assign(w.matrix());
    for i in 0..n {
        let c = classes.class_of(i);
        out[(i, d)] = if sizes[c] >= 2 {
            class_sums[c] / sizes[c] as f64
        } else {
            word_means[i]
        };
    }
    w.with_matrix(out)
}

/// Run one extrofitting pass over `w` with the given class partition.
///
/// Requires at least two classes (a single class makes the between-class
/// scatter identically zero, leaving nothing to separate).
pub fn extrofit(
    w: &EmbeddingMatrix,
    classes: &ClassAssignment,
    options: &ExtrofitOptions,
) -> Result<EmbeddingMatrix> {
    let out_dim = options.out_dim.unwrap_or(w.dim());
    if w.is_empty() {
        return Err(Error::EmptyInput("cannot extrofit an empty vocabulary".into()));
    }
    if out_dim == 0 || out_dim > w.dim() + 1 {
        return Err(Error::InvalidParam(format!(
            "output dimension {out_dim} outside 1..={}",
            w.dim() + 1
        )));
    }
    if classes.num_classes() < 2 {
        return Err(Error::Degenerate(
            "extrofitting needs at least two word classes; all words fell into one".into(),
        ));
    }

    let expanded = expand(w, classes)?;
    let scatter = scatter_matrices(expanded.matrix(), classes, options.between_weighting)?;
    let transform = discriminant_directions(&scatter, out_dim, options.shrinkage)?;
    let projected = par_matmul(expanded.matrix().view(), transform.columns.view());
    w.with_matrix(projected)
}
