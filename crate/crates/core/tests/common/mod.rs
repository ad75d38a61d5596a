//! Shared helpers for integration tests: a tiny deterministic RNG and
//! independent oracle implementations (Jacobi eigensolver, counting-rank
//! Spearman, direct objective evaluation) that the library code under
//! test never touches.

#![allow(dead_code)]

use ndarray::{Array2, ArrayView1};

use embedfit::EmbeddingMatrix;

/// SplitMix64: tiny, seedable, and plenty for test data.
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Standard normal via Box–Muller.
    pub fn gaussian(&mut self) -> f64 {
        let u1 = self.uniform().max(1e-300);
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Uniform integer in [0, n).
    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}

pub fn gaussian_matrix(rng: &mut SplitMix64, n: usize, d: usize) -> Array2<f64> {
    let mut data = Vec::with_capacity(n * d);
    for _ in 0..n * d {
        data.push(rng.gaussian());
    }
    Array2::from_shape_vec((n, d), data).expect("shape matches data")
}

/// Rows drawn from a Gaussian and normalized to unit length.
pub fn unit_rows(rng: &mut SplitMix64, n: usize, d: usize) -> Array2<f64> {
    let mut m = gaussian_matrix(rng, n, d);
    for mut row in m.rows_mut() {
        let norm = row.dot(&row).sqrt();
        if norm > 0.0 {
            row.mapv_inplace(|v| v / norm);
        }
    }
    m
}

pub fn embedding_from(matrix: Array2<f64>) -> EmbeddingMatrix {
    let words: Vec<String> = (0..matrix.nrows()).map(|i| format!("w{i:04}")).collect();
    let rows: Vec<Vec<f64>> = matrix.rows().into_iter().map(|r| r.to_vec()).collect();
    EmbeddingMatrix::from_rows(words, rows).expect("valid test embedding")
}

/// Class-structured data: `classes` Gaussian centers, `per` members each,
/// members scattered around their center with `noise` standard deviation.
/// Returns the embedding and the class label per row.
pub fn clustered_embedding(
    rng: &mut SplitMix64,
    classes: usize,
    per: usize,
    d: usize,
    noise: f64,
) -> (EmbeddingMatrix, Vec<usize>) {
    let centers = gaussian_matrix(rng, classes, d);
    let mut rows = Vec::with_capacity(classes * per);
    let mut labels = Vec::with_capacity(classes * per);
    for c in 0..classes {
        for _ in 0..per {
            let row: Vec<f64> = (0..d).map(|t| centers[[c, t]] + noise * rng.gaussian()).collect();
            rows.push(row);
            labels.push(c);
        }
    }
    let words: Vec<String> = (0..rows.len()).map(|i| format!("w{i:04}")).collect();
    (
        EmbeddingMatrix::from_rows(words, rows).expect("valid test embedding"),
        labels,
    )
}

/// Symmetric closure of raw index pairs, self-pairs dropped, sorted and
/// deduplicated — the shape `SynonymPairs` promises.
pub fn symmetric_closure(raw: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(raw.len() * 2);
    for &(i, j) in raw {
        if i != j {
            pairs.push((i, j));
            pairs.push((j, i));
        }
    }
    pairs.sort_unstable();
    pairs.dedup();
    pairs
}

fn plain_cosine(u: ArrayView1<'_, f64>, v: ArrayView1<'_, f64>) -> f64 {
    u.dot(&v) / (u.dot(&u).sqrt() * v.dot(&v).sqrt())
}

/// Mean cosine over all unordered same-class row pairs.
pub fn mean_within_class_cosine(w: &EmbeddingMatrix, labels: &[usize]) -> f64 {
    let x = w.matrix();
    let mut total = 0.0;
    let mut count = 0usize;
    for i in 0..x.nrows() {
        for j in i + 1..x.nrows() {
            if labels[i] == labels[j] {
                total += plain_cosine(x.row(i), x.row(j));
                count += 1;
            }
        }
    }
    assert!(count > 0, "no within-class pairs to average");
    total / count as f64
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns
/// eigenvalues in descending order with matching eigenvector columns.
/// Slow and simple on purpose: it shares nothing with the library path.
pub fn jacobi_eigen(a: &Array2<f64>) -> (Vec<f64>, Array2<f64>) {
    let n = a.nrows();
    assert_eq!(a.dim(), (n, n), "square input required");
    let mut m = a.clone();
    let mut v: Array2<f64> = Array2::eye(n);
    let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt() + 1.0;

    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += m[[p, q]] * m[[p, q]];
            }
        }
        if off.sqrt() <= 1e-14 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[[p, q]];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[[q, q]] - m[[p, p]]) / (2.0 * apq);
                let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                let t = sign / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..n {
                    let mip = m[[i, p]];
                    let miq = m[[i, q]];
                    m[[i, p]] = c * mip - s * miq;
                    m[[i, q]] = s * mip + c * miq;
                }
                for i in 0..n {
                    let mpi = m[[p, i]];
                    let mqi = m[[q, i]];
                    m[[p, i]] = c * mpi - s * mqi;
                    m[[q, i]] = s * mpi + c * mqi;
                }
                for i in 0..n {
                    let vip = v[[i, p]];
                    let viq = v[[i, q]];
                    v[[i, p]] = c * vip - s * viq;
                    v[[i, q]] = s * vip + c * viq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[[j, j]].partial_cmp(&m[[i, i]]).expect("finite eigenvalues"));
    let values: Vec<f64> = order.iter().map(|&i| m[[i, i]]).collect();
    let mut vectors = Array2::zeros((n, n));
    for (col, &src) in order.iter().enumerate() {
        for i in 0..n {
            vectors[[i, col]] = v[[i, src]];
        }
    }
    (values, vectors)
}

/// Tie-averaged ranks by brute-force counting: rank = (# strictly below)
/// + (ties + 1)/2, 1-based.
pub fn oracle_ranks(values: &[f64]) -> Vec<f64> {
    values
        .iter()
        .map(|&x| {
            let below = values.iter().filter(|&&y| y < x).count();
            let ties = values.iter().filter(|&&y| y == x).count();
            below as f64 + (ties as f64 + 1.0) / 2.0
        })
        .collect()
}

/// Reference Spearman: counting-rank vectors fed through a plain Pearson.
pub fn oracle_spearman(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let rx = oracle_ranks(x);
    let ry = oracle_ranks(y);
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
    assert!(vx > 0.0 && vy > 0.0, "constant input has no correlation");
    (cov / (vx * vy).sqrt()).clamp(-1.0, 1.0)
}

/// Direct evaluation of the retrofitting objective under inverse-degree
/// pair weights: Σ_i α‖q_i − q̂_i‖² + Σ_(i,j) (1/deg i)‖q_i − q_j‖², the
/// sum running over ordered pairs.
pub fn oracle_objective_invdeg(
    q: &Array2<f64>,
    q_hat: &Array2<f64>,
    pairs: &[(usize, usize)],
    alpha: f64,
) -> f64 {
    assert_eq!(q.dim(), q_hat.dim());
    let n = q.nrows();
    let mut deg = vec![0usize; n];
    for &(i, _) in pairs {
        deg[i] += 1;
    }
    let mut psi = 0.0;
    for i in 0..n {
        let mut fit = 0.0;
        for t in 0..q.ncols() {
            let diff = q[[i, t]] - q_hat[[i, t]];
            fit += diff * diff;
        }
        psi += alpha * fit;
    }
    for &(i, j) in pairs {
        let beta = 1.0 / deg[i] as f64;
        let mut dist = 0.0;
        for t in 0..q.ncols() {
            let diff = q[[i, t]] - q[[j, t]];
            dist += diff * diff;
        }
        psi += beta * dist;
    }
    psi
}

/// Frobenius norm of the difference between two matrices.
pub fn frobenius_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    assert_eq!(a.dim(), b.dim());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn frobenius(a: &Array2<f64>) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}
