//! Retrofitting: iteratively pull word vectors toward their synonyms while
//! staying anchored to the original vectors.
//!
//! The objective being minimized is
//!
//! ```text
//! Ψ(Q) = Σ_i [ α‖q_i − q̂_i‖² + Σ_{(i,j)∈E} β_ij ‖q_i − q_j‖² ]
//! ```
//!
//! where `q̂` are the original vectors and `E` contains synonym pairs in
//! both orientations. Each sweep performs exact coordinate minimization in
//! vocabulary order: solving `∂Ψ/∂q_i = 0` picks up both the `(i,j)` and
//! `(j,i)` terms of every edge, so each update uses the folded edge weight
//! `β_ij + β_ji`. This is what makes Ψ non-increasing sweep over sweep —
//! updating with the one-sided weight alone does not minimize Ψ exactly
//! and can increase it.

use crate::embedding::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::lexicon::SynonymPairs;

/// Rule assigning the association strength β_ij to the ordered pair (i, j).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum BetaMode {
    /// β_ij = 1 / degree(i), the usual choice: each word distributes unit
    /// mass over its synonyms.
    #[default]
    InverseDegree,
    /// β_ij = c for every ordered pair.
    Constant(f64),
}

/// Hyperparameters for [`retrofit`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetrofitConfig {
    /// Attachment strength to the original vector (α ≥ 0).
    pub alpha: f64,
    /// Association strength rule for synonym pairs.
    pub beta_mode: BetaMode,
    /// Number of sweeps over the vocabulary.
    pub iterations: usize,
}

impl Default for RetrofitConfig {
    fn default() -> Self {
        RetrofitConfig {
            alpha: 1.0,
            beta_mode: BetaMode::InverseDegree,
            iterations: 10,
        }
    }
}

fn validate(
    w: &EmbeddingMatrix,
    pairs: &SynonymPairs,
    config: &RetrofitConfig,
) -> Result<()> {
    if w.is_empty() {
        return Err(Error::EmptyInput("cannot retrofit an empty vocabulary".into()));
    }
    if config.iterations == 0 {
        return Err(Error::InvalidParam("iterations must be ≥ 1".into()));
    }
    if !config.alpha.is_finite() || config.alpha < 0.0 {
        return Err(Error::InvalidParam(format!(
            "alpha must be finite and non-negative, got {}",
            config.alpha
        )));
    }
    if let BetaMode::Constant(c) = config.beta_mode {
        if !c.is_finite() || c < 0.0 {
            return Err(Error::InvalidParam(format!(
                "constant beta must be finite and non-negative, got {c}"
            )));
        }
        if config.alpha == 0.0 && c == 0.0 {
            return Err(Error::InvalidParam(
                "alpha and beta cannot both be zero".into(),
            ));
        }
    }
    let n = w.len();
    if let Some(&(i, j)) = pairs.pairs.iter().find(|&&(i, j)| i >= n || j >= n) {
        return Err(Error::DimensionMismatch(format!(
            "synonym pair ({i}, {j}) outside vocabulary of size {n}"
        )));
    }
    Ok(())
}

/// Per-orientation association strength β_ij.
fn beta(mode: BetaMode, inv_deg: &[f64], i: usize) -> f64 {
    match mode {
        BetaMode::InverseDegree => inv_deg[i],
        BetaMode::Constant(c) => c,
    }
}

/// Run `config.iterations` exact coordinate-minimization sweeps of Ψ over
/// a copy of `w`, in vocabulary order. Words with no synonym pairs are
/// returned bit-identical.
pub fn retrofit(
    w: &EmbeddingMatrix,
    pairs: &SynonymPairs,
    config: &RetrofitConfig,
) -> Result<EmbeddingMatrix> {
    validate(w, pairs, config)?;
    let n = w.len();
    let adjacency = pairs.neighbors(n);
    if config.alpha == 0.0 {
        if let Some(lonely) = (0..n).find(|&i| adjacency[i].is_empty()) {
            return Err(Error::InvalidParam(format!(
                "alpha = 0 requires every word to have a synonym, but {:?} has none",
                w.vocab().word(lonely)
            )));
        }
    }
    let inv_deg: Vec<f64> = adjacency
        .iter()
        .map(|a| if a.is_empty() { 0.0 } else { 1.0 / a.len() as f64 })
        .collect();

    let original = w.matrix();
    let mut q = original.clone();
    let dim = w.dim();

    let mut acc = vec![0.0f64; dim];
    for _sweep in 0..config.iterations {
        for (i, neighbors) in adjacency.iter().enumerate() {
            if neighbors.is_empty() {
                continue;
            }
            let orig_row = original.row(i);
            for (x, &o) in acc.iter_mut().zip(orig_row.iter()) {
                *x = config.alpha * o;
            }
            let mut denom = config.alpha;
            for &j in neighbors {
                // Folded weight: edge (i,j) appears in Ψ once per
                // orientation, and ∂/∂q_i sees both terms.
                let weight =
                    beta(config.beta_mode, &inv_deg, i) + beta(config.beta_mode, &inv_deg, j);
                let neighbor = q.row(j);
                for (x, &v) in acc.iter_mut().zip(neighbor.iter()) {
                    *x += weight * v;
                }
                denom += weight;
            }
            let inv = 1.0 / denom;
            for (x, v) in q.row_mut(i).iter_mut().zip(acc.iter()) {
                *x = v * inv;
            }
        }
    }
    w.with_matrix(q)
}

/// Exact value of Ψ(Q): fit terms against `q_hat` plus one association
/// term per ordered pair in `pairs`.
pub fn objective(
    q: &EmbeddingMatrix,
    q_hat: &EmbeddingMatrix,
    pairs: &SynonymPairs,
    config: &RetrofitConfig,
) -> Result<f64> {
    if q.len() != q_hat.len() || q.dim() != q_hat.dim() {
        return Err(Error::DimensionMismatch(format!(
            "Q is {}×{} but Q̂ is {}×{}",
            q.len(),
            q.dim(),
            q_hat.len(),
            q_hat.dim()
        )));
    }
    let n = q.len();
    if let Some(&(i, j)) = pairs.pairs.iter().find(|&&(i, j)| i >= n || j >= n) {
        return Err(Error::DimensionMismatch(format!(
            "synonym pair ({i}, {j}) outside vocabulary of size {n}"
        )));
    }

    let adjacency = pairs.neighbors(n);
    let inv_deg: Vec<f64> = adjacency
        .iter()
        .map(|a| if a.is_empty() { 0.0 } else { 1.0 / a.len() as f64 })
        .collect();

    let sq_dist = |a: ndarray::ArrayView1<f64>, b: ndarray::ArrayView1<f64>| -> f64 {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| (x - y) * (x - y))
            .sum()
    };

    let mut psi = 0.0;
    for i in 0..n {
        psi += config.alpha * sq_dist(q.row(i), q_hat.row(i));
    }
    for &(i, j) in &pairs.pairs {
        psi += beta(config.beta_mode, &inv_deg, i) * sq_dist(q.row(i), q.row(j));
    }
    Ok(psi)
}
