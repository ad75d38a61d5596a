//! Dense linear-algebra kernels: truncated SVD, scatter matrices, a
//! symmetric generalized eigensolver, and cosine similarity.
//!
//! Vocabularies can run into the millions of rows while dimensionality
//! stays small (≤ ~1000), so everything here reduces to d×d problems:
//! the SVD goes through the Gram matrix AᵀA, and scatter accumulation
//! streams over fixed-size row blocks. Block reductions are parallel but
//! merged in a fixed order, so results do not depend on thread count.

use nalgebra::DMatrix;
use ndarray::{s, Array1, Array2, ArrayView2};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lexicon::ClassAssignment;

/// Rows per block for streaming/parallel accumulation.
const ROW_BLOCK: usize = 4096;

/// Generalized eigenvalues at or below `1e-12 · max(1, λ_max)` are treated
/// as zero.
const ZERO_EIG_REL: f64 = 1e-12;

/// Truncated singular value decomposition `A ≈ U diag(S) Vᵀ`.
#[derive(Debug, Clone)]
pub struct TruncatedSvd {
    /// N×k matrix with orthonormal columns.
    pub u: Array2<f64>,
    /// k singular values, non-negative and non-increasing.
    pub singular_values: Vec<f64>,
    /// d×k matrix with orthonormal columns.
    pub v: Array2<f64>,
    /// Retained rank.
    pub k: usize,
}

/// Between-class and within-class scatter of a row matrix under a class
/// assignment.
#[derive(Debug, Clone)]
pub struct ScatterPair {
    /// d×d between-class scatter.
    pub s_b: Array2<f64>,
    /// d×d within-class scatter.
    pub s_w: Array2<f64>,
    /// One mean row per class (num_classes × d).
    pub class_means: Array2<f64>,
    /// Mean over all rows.
    pub global_mean: Array1<f64>,
}

/// How class means are weighted in the between-class scatter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BetweenWeighting {
    /// Weight each class by its member count (keeps `S_b + S_w` equal to
    /// the total scatter).
    #[default]
    SizeWeighted,
    /// Count every class once regardless of size.
    Uniform,
}

/// Projection basis found by [`discriminant_directions`].
#[derive(Debug, Clone)]
pub struct TransformMatrix {
    /// d×k matrix whose columns are generalized eigenvectors, normalized
    /// so that `uᵀ S_w_reg u = 1`.
    pub columns: Array2<f64>,
    /// Generalized eigenvalues, non-negative and non-increasing.
    pub eigenvalues: Vec<f64>,
    /// True when fewer than k strictly positive eigenvalues exist; the
    /// remaining columns span directions of smallest within-class variance.
    pub deficient: bool,
}

pub(crate) fn block_ranges(n: usize, block: usize) -> Vec<(usize, usize)> {
    let mut ranges = Vec::with_capacity(n.div_ceil(block.max(1)));
    let mut lo = 0;
    while lo < n {
        let hi = (lo + block).min(n);
        ranges.push((lo, hi));
        lo = hi;
    }
    ranges
}

fn all_finite(a: &Array2<f64>) -> bool {
    match a.as_slice_memory_order() {
        Some(s) => s.par_iter().all(|v| v.is_finite()),
        None => a.iter().all(|v| v.is_finite()),
    }
}

fn symmetrize(m: &mut Array2<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}

/// `AᵀA`, accumulated over row blocks in parallel and merged in block
/// order, then symmetrized.
pub(crate) fn gram(a: ArrayView2<'_, f64>) -> Array2<f64> {
    let (n, d) = a.dim();
    let partials: Vec<Array2<f64>> = block_ranges(n, ROW_BLOCK)
        .par_iter()
        .map(|&(lo, hi)| {
            let b = a.slice(s![lo..hi, ..]);
            b.t().dot(&b)
        })
        .collect();
    let mut g = Array2::zeros((d, d));
    for p in partials {
        g += &p;
    }
    symmetrize(&mut g);
    g
}

/// `A · B` computed over row blocks of `A` in parallel; each output row is
/// produced by exactly one block, so the result is deterministic.
pub(crate) fn par_matmul(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> Array2<f64> {
    let blocks = block_ranges(a.nrows(), ROW_BLOCK);
    let partials: Vec<Array2<f64>> = blocks
        .par_iter()
        .map(|&(lo, hi)| a.slice(s![lo..hi, ..]).dot(&b))
        .collect();
    let mut out = Array2::zeros((a.nrows(), b.ncols()));
    for (&(lo, hi), p) in blocks.iter().zip(partials) {
        out.slice_mut(s![lo..hi, ..]).assign(&p);
    }
    out
}

fn to_na(a: &Array2<f64>) -> DMatrix<f64> {
    DMatrix::from_row_iterator(a.nrows(), a.ncols(), a.iter().copied())
}

fn from_na(m: &DMatrix<f64>) -> Array2<f64> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

/// Eigendecomposition of a symmetric matrix, eigenvalues sorted
/// non-increasing (ties keep the solver's order).
pub(crate) fn sym_eigen_desc(m: &Array2<f64>) -> (Vec<f64>, Array2<f64>) {
    let eig = nalgebra::SymmetricEigen::new(to_na(m));
    let d = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .expect("symmetric eigenvalues are finite")
    });
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = Array2::from_shape_fn((d, d), |(r, c)| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Flip each column so its largest-magnitude component is positive
/// (lowest index wins ties). Fixes the sign ambiguity of eigenvectors so
/// repeated runs agree bit-for-bit.
pub(crate) fn fix_column_signs(m: &mut Array2<f64>) {
    for mut col in m.columns_mut() {
        let mut best = 0usize;
        let mut best_abs = f64::NEG_INFINITY;
        for (i, &v) in col.iter().enumerate() {
            if v.abs() > best_abs {
                best_abs = v.abs();
                best = i;
            }
        }
        if col[best] < 0.0 {
            col.mapv_inplace(|v| -v);
        }
    }
}

/// Orthogonalize column `j` of `u` against columns `0..j` (two projection
/// passes) and renormalize. Returns false if the column is numerically in
/// the span of its predecessors.
fn reorthonormalize_column(u: &mut Array2<f64>, j: usize) -> bool {
    for _ in 0..2 {
        for i in 0..j {
            let proj = u.column(i).dot(&u.column(j));
            let ui = u.column(i).to_owned();
            u.column_mut(j).scaled_add(-proj, &ui);
        }
    }
    let norm = u.column(j).dot(&u.column(j)).sqrt();
    if norm < 1e-8 {
        return false;
    }
    u.column_mut(j).mapv_inplace(|v| v / norm);
    true
}

/// Fill column `j` of `u` with a unit vector orthogonal to columns `0..j`,
/// chosen deterministically from the standard basis.
fn complete_column(u: &mut Array2<f64>, j: usize) {
    let n = u.nrows();
    let limit = n.min(2 * j + 4);
    let mut best: Option<(f64, Array1<f64>)> = None;
    for cand in 0..limit {
        let mut r = Array1::zeros(n);
        r[cand] = 1.0;
        for _ in 0..2 {
            for i in 0..j {
                let proj = u.column(i).dot(&r);
                let ui = u.column(i).to_owned();
                r.scaled_add(-proj, &ui);
            }
        }
        let norm_sq = r.dot(&r);
        if norm_sq > 0.25 {
            best = Some((norm_sq, r));
            break;
        }
        if best.as_ref().is_none_or(|(b, _)| norm_sq > *b) {
            best = Some((norm_sq, r));
        }
    }
    let (norm_sq, r) = best.expect("at least one candidate column");
    let norm = norm_sq.sqrt();
    u.column_mut(j).assign(&r.mapv(|v| v / norm));
}

/// Best rank-k approximation of `a`, computed through the d×d Gram matrix
/// `AᵀA` (exact for k ≤ d and avoids factorizing N×d directly).
///
/// Singular vectors have their sign fixed (largest-magnitude component
/// positive). Columns of U belonging to numerically zero singular values
/// are completed to an orthonormal set deterministically.
pub fn truncated_svd(a: &Array2<f64>, k: usize) -> Result<TruncatedSvd> {
    let (n, d) = a.dim();
    if n == 0 || d == 0 {
        return Err(Error::EmptyInput("cannot factorize an empty matrix".into()));
    }
    let max_k = n.min(d);
    if k == 0 || k > max_k {
        return Err(Error::InvalidParam(format!(
            "rank k={k} out of range 1..={max_k}"
        )));
    }
    if !all_finite(a) {
        return Err(Error::Numerical(
            "matrix contains non-finite values".into(),
        ));
    }

    let g = gram(a.view());
    let (eigvals, eigvecs) = sym_eigen_desc(&g);
    let mut v = eigvecs.slice(s![.., ..k]).to_owned();
    fix_column_signs(&mut v);

    // The Gram route cannot resolve eigenvalues below roundoff relative to
    // λ_max; treat those as exact zeros (their square roots would otherwise
    // inject spurious energy of order ‖A‖·√ε into the factorization).
    let eig_cutoff = eigvals[0].max(0.0) * (n.max(d) as f64) * f64::EPSILON;
    let singular_values: Vec<f64> = eigvals[..k]
        .iter()
        .map(|&l| if l > eig_cutoff { l.sqrt() } else { 0.0 })
        .collect();

    let s_max = singular_values[0];
    // Columns with singular values this small lose too much precision in
    // the Gram route; re-orthogonalize them against the rest.
    let repair_below = s_max * 1e-6;

    let mut u = par_matmul(a.view(), v.view());
    for (j, &sv) in singular_values.iter().enumerate() {
        if sv > 0.0 {
            let inv = 1.0 / sv;
            u.column_mut(j).mapv_inplace(|x| x * inv);
        }
    }
    for (j, &sv) in singular_values.iter().enumerate() {
        if sv > 0.0 {
            if sv < repair_below && !reorthonormalize_column(&mut u, j) {
                complete_column(&mut u, j);
            }
        } else {
            complete_column(&mut u, j);
        }
    }

    Ok(TruncatedSvd {
        u,
        singular_values,
        v,
        k,
    })
}

/// Between-class and within-class scatter of `x` under `classes`.
///
/// Within-class scatter sums `(x_i − μ_c)(x_i − μ_c)ᵀ` over all rows;
/// singleton classes contribute exactly zero. Between-class scatter sums
/// `(μ_c − μ)(μ_c − μ)ᵀ` over classes, weighted per `weighting`.
pub fn scatter_matrices(
    x: &Array2<f64>,
    classes: &ClassAssignment,
    weighting: BetweenWeighting,
) -> Result<ScatterPair> {
    let (n, d) = x.dim();
    if n == 0 || d == 0 {
        return Err(Error::EmptyInput("cannot compute scatter of an empty matrix".into()));
    }
    if classes.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "class assignment covers {} rows but matrix has {n}",
            classes.len()
        )));
    }

    let c = classes.num_classes();
    let sizes = classes.class_sizes();

    let mut class_means = Array2::zeros((c, d));
    for i in 0..n {
        let mut row = class_means.row_mut(classes.class_of(i));
        row += &x.row(i);
    }
    let global_mean = class_means.sum_axis(ndarray::Axis(0)) / n as f64;
    for (cid, &size) in sizes.iter().enumerate() {
        let inv = 1.0 / size as f64;
        class_means.row_mut(cid).mapv_inplace(|v| v * inv);
    }

    // S_w: Gram of rows centered at their class mean, streamed in blocks.
    let sw_partials: Vec<Array2<f64>> = block_ranges(n, ROW_BLOCK)
        .par_iter()
        .map(|&(lo, hi)| {
            let mut block = x.slice(s![lo..hi, ..]).to_owned();
            for (r, i) in (lo..hi).enumerate() {
                let mut row = block.row_mut(r);
                row -= &class_means.row(classes.class_of(i));
            }
            block.t().dot(&block)
        })
        .collect();
    let mut s_w = Array2::zeros((d, d));
    for p in sw_partials {
        s_w += &p;
    }
    symmetrize(&mut s_w);

    // S_b: Gram of centered class means, scaled by √n_c when size-weighted.
    let sb_partials: Vec<Array2<f64>> = block_ranges(c, ROW_BLOCK)
        .par_iter()
        .map(|&(lo, hi)| {
            let mut block = class_means.slice(s![lo..hi, ..]).to_owned();
            for (r, cid) in (lo..hi).enumerate() {
                let mut row = block.row_mut(r);
                row -= &global_mean;
                if weighting == BetweenWeighting::SizeWeighted {
                    let w = (sizes[cid] as f64).sqrt();
                    row.mapv_inplace(|v| v * w);
                }
            }
            block.t().dot(&block)
        })
        .collect();
    let mut s_b = Array2::zeros((d, d));
    for p in sb_partials {
        s_b += &p;
    }
    symmetrize(&mut s_b);

    Ok(ScatterPair {
        s_b,
        s_w,
        class_means,
        global_mean,
    })
}

/// Top-k generalized eigenvectors of the pencil `(S_b, S_w_reg)` where
/// `S_w_reg = (1−shrinkage)·S_w + shrinkage·(trace(S_w)/d)·I`.
///
/// Solved by whitening with the Cholesky factor of `S_w_reg`, which keeps
/// the problem symmetric; the returned columns satisfy
/// `uᵀ S_w_reg u = 1` and are mutually `S_w_reg`-orthogonal. When fewer
/// than k strictly positive eigenvalues exist, the remaining columns are
/// filled with directions of smallest within-class variance and the
/// result is flagged `deficient`.
pub fn discriminant_directions(
    scatter: &ScatterPair,
    k: usize,
    shrinkage: f64,
) -> Result<TransformMatrix> {
    let d = scatter.s_w.nrows();
    if scatter.s_w.dim() != (d, d) || scatter.s_b.dim() != (d, d) {
        return Err(Error::DimensionMismatch(
            "scatter matrices must be square and of equal size".into(),
        ));
    }
    if k == 0 || k > d {
        return Err(Error::InvalidParam(format!(
            "requested {k} directions from {d}-dimensional scatter"
        )));
    }
    if !(0.0..=1.0).contains(&shrinkage) {
        return Err(Error::InvalidParam(format!(
            "shrinkage {shrinkage} outside [0, 1]"
        )));
    }

    let trace: f64 = scatter.s_w.diag().sum();
    let mut sigma2 = trace / d as f64;
    if sigma2 <= 0.0 {
        let sb_zero = scatter.s_b.iter().all(|&v| v == 0.0);
        if sb_zero {
            return Err(Error::Numerical(
                "scatter matrices are identically zero; no directions exist".into(),
            ));
        }
        // All classes are singletons: no within-class variance at all.
        // Fall back to a unit identity metric so the between-class
        // structure still defines the transform.
        sigma2 = 1.0;
    }

    let mut s_w_reg = scatter.s_w.mapv(|v| v * (1.0 - shrinkage));
    for i in 0..d {
        s_w_reg[(i, i)] += shrinkage * sigma2;
    }

    let chol = nalgebra::Cholesky::new(to_na(&s_w_reg)).ok_or_else(|| {
        Error::Numerical(
            "regularized within-class scatter is not positive definite; increase shrinkage"
                .into(),
        )
    })?;
    let l = chol.l();

    let sb_na = to_na(&scatter.s_b);
    let m1 = l
        .solve_lower_triangular(&sb_na)
        .ok_or_else(|| Error::Numerical("triangular solve failed".into()))?;
    let c_na = l
        .solve_lower_triangular(&m1.transpose())
        .ok_or_else(|| Error::Numerical("triangular solve failed".into()))?;
    let c_sym = (&c_na + c_na.transpose()) * 0.5;

    let mut whitened = from_na(&c_sym);
    symmetrize(&mut whitened);
    let (eigvals, eigvecs) = sym_eigen_desc(&whitened);

    // Back-transform all eigenvectors: u = L⁻ᵀ y.
    let y = to_na(&eigvecs);
    let u_all_na = l
        .tr_solve_lower_triangular(&y)
        .ok_or_else(|| Error::Numerical("triangular solve failed".into()))?;
    let u_all = from_na(&u_all_na);

    let lambda_max = eigvals[0].max(0.0);
    let zero_tol = ZERO_EIG_REL * lambda_max.max(1.0);
    let positive = eigvals.iter().take_while(|&&l| l > zero_tol).count();
    let deficient = positive < k;

    let mut order: Vec<usize> = (0..d).collect();
    if deficient {
        // Order the numerically-zero tail by descending ‖u‖: with
        // uᵀ S_w_reg u = 1, a longer u means less within-class variance
        // along that direction.
        let norms: Vec<f64> = (0..d)
            .map(|j| u_all.column(j).dot(&u_all.column(j)))
            .collect();
        order[positive..].sort_by(|&a, &b| {
            norms[b]
                .partial_cmp(&norms[a])
                .expect("column norms are finite")
        });
    }

    let mut columns = Array2::zeros((d, k));
    let mut eigenvalues = Vec::with_capacity(k);
    for (out_j, &src_j) in order[..k].iter().enumerate() {
        columns.column_mut(out_j).assign(&u_all.column(src_j));
        eigenvalues.push(if out_j < positive {
            eigvals[src_j].max(0.0)
        } else {
            0.0
        });
    }
    fix_column_signs(&mut columns);

    Ok(TransformMatrix {
        columns,
        eigenvalues,
        deficient,
    })
}

/// Cosine similarity `u·v / (‖u‖‖v‖)`, clamped into [−1, 1].
pub fn cosine(u: ndarray::ArrayView1<'_, f64>, v: ndarray::ArrayView1<'_, f64>) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch(format!(
            "cosine of {}- and {}-dimensional vectors",
            u.len(),
            v.len()
        )));
    }
    let nu2 = u.dot(&u);
    let nv2 = v.dot(&v);
    if nu2 == 0.0 || nv2 == 0.0 {
        return Err(Error::Numerical(
            "cosine similarity of a zero-norm vector is undefined".into(),
        ));
    }
    Ok((u.dot(&v) / (nu2 * nv2).sqrt()).clamp(-1.0, 1.0))
}
