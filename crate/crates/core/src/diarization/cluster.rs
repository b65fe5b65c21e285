//! Speaker-count estimation and clustering via normalized maximum
//! eigengap-based spectral clustering (NME-SC): the affinity matrix is
//! binarized at several pruning levels p, the level minimizing
//! p / max-eigengap wins, and the eigengap location fixes the speaker count.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NmeScConfig {
    pub p_min: usize,
    pub p_max: usize,
    pub max_speakers: usize,
    pub seed: u64,
}

impl Default for NmeScConfig {
    fn default() -> Self {
        Self {
            p_min: 2,
            p_max: 30,
            max_speakers: 8,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterResult {
    /// Cluster label per embedding, renumbered by first appearance.
    pub labels: Vec<usize>,
    pub num_speakers: usize,
    /// Winning pruning level.
    pub best_p: usize,
}

/// Clusters unit-norm embeddings. Fewer than two embeddings short-circuit to
/// a single cluster.
pub fn nme_sc_cluster(embeddings: &[Vec<f64>], cfg: &NmeScConfig) -> Result<ClusterResult> {
    let n = embeddings.len();
    if n == 0 {
        return Ok(ClusterResult { labels: Vec::new(), num_speakers: 0, best_p: 0 });
    }
    if n == 1 {
        return Ok(ClusterResult { labels: vec![0], num_speakers: 1, best_p: 0 });
    }
    let dim = embeddings[0].len();
    if embeddings.iter().any(|e| e.len() != dim) {
        return Err(Error::invalid_input("embeddings disagree on dimension"));
    }
    if cfg.max_speakers == 0 {
        return Err(Error::invalid_input("max_speakers must be positive"));
    }

    // Cosine affinity; embeddings are unit-norm so the dot product suffices.
    let mut affinity = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let dot: f64 = embeddings[i].iter().zip(&embeddings[j]).map(|(a, b)| a * b).sum();
            affinity[(i, j)] = dot;
            affinity[(j, i)] = dot;
        }
    }

    let p_lo = cfg.p_min.clamp(1, n);
    let p_hi = cfg.p_max.clamp(p_lo, n);
    let max_k = cfg.max_speakers.min(n - 1);

    let mut best: Option<(f64, usize, usize)> = None; // (ratio, p, k)
    for p in p_lo..=p_hi {
        let laplacian = pruned_laplacian(&affinity, p);
        let eigenvalues = sorted_eigenvalues(&laplacian);
        let (k, gap) = max_eigengap(&eigenvalues, max_k);
        if gap <= 1e-12 {
            continue;
        }
        let ratio = p as f64 / gap;
        if best.is_none_or(|(r, _, _)| ratio < r) {
            best = Some((ratio, p, k));
        }
    }
    let (_, best_p, k) = best.unwrap_or((f64::INFINITY, p_hi, 1));

    let labels = if k == 1 {
        vec![0; n]
    } else {
        let laplacian = pruned_laplacian(&affinity, best_p);
        let rows = spectral_rows(&laplacian, k);
        kmeans(&rows, k, cfg.seed)
    };

    let labels = canonicalize(&labels);
    let num_speakers = labels.iter().copied().max().unwrap_or(0) + 1;
    Ok(ClusterResult { labels, num_speakers, best_p })
}

/// Binarizes the affinity by keeping each row's top-p entries, symmetrizes
/// with max, and forms the symmetric normalized Laplacian.
fn pruned_laplacian(affinity: &DMatrix<f64>, p: usize) -> DMatrix<f64> {
    let n = affinity.nrows();
    let mut binary = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            affinity[(i, b)]
                .partial_cmp(&affinity[(i, a)])
                .unwrap()
                .then(a.cmp(&b))
        });
        for &j in order.iter().take(p) {
            binary[(i, j)] = 1.0;
        }
    }
    // Symmetrize: keep an edge if either endpoint selected it.
    let mut sym = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            sym[(i, j)] = f64::max(binary[(i, j)], binary[(j, i)]);
        }
    }
    let degrees: Vec<f64> = (0..n).map(|i| sym.row(i).sum()).collect();
    let mut laplacian = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let norm = (degrees[i] * degrees[j]).sqrt();
            let a = if norm > 0.0 { sym[(i, j)] / norm } else { 0.0 };
            laplacian[(i, j)] = f64::from(u8::from(i == j)) - a;
        }
    }
    laplacian
}

fn sorted_eigenvalues(laplacian: &DMatrix<f64>) -> Vec<f64> {
    let eigen = SymmetricEigen::new(laplacian.clone());
    let mut values: Vec<f64> = eigen.eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

/// Largest gap `lambda_{k+1} - lambda_k` for k in 1..=max_k (1-based),
/// smallest k winning ties.
fn max_eigengap(eigenvalues: &[f64], max_k: usize) -> (usize, f64) {
    let mut best_k = 1;
    let mut best_gap = f64::NEG_INFINITY;
    for k in 1..=max_k.min(eigenvalues.len() - 1) {
        let gap = eigenvalues[k] - eigenvalues[k - 1];
        if gap > best_gap {
            best_gap = gap;
            best_k = k;
        }
    }
    (best_k, best_gap)
}

/// Rows of the n x k matrix of the k smallest eigenvectors, row-normalized.
fn spectral_rows(laplacian: &DMatrix<f64>, k: usize) -> Vec<Vec<f64>> {
    let n = laplacian.nrows();
    let eigen = SymmetricEigen::new(laplacian.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eigen.eigenvalues[a].total_cmp(&eigen.eigenvalues[b]));
    let mut rows = vec![vec![0.0; k]; n];
    for (col, &idx) in order.iter().take(k).enumerate() {
        let v = eigen.eigenvectors.column(idx);
        for i in 0..n {
            rows[i][col] = v[i];
        }
    }
    for row in &mut rows {
        let norm: f64 = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            row.iter_mut().for_each(|x| *x /= norm);
        }
    }
    rows
}

/// Deterministic seeded k-means with k-means++ initialization.
fn kmeans(points: &[Vec<f64>], k: usize, seed: u64) -> Vec<usize> {
    let n = points.len();
    let dim = points[0].len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let dist2 = |a: &[f64], b: &[f64]| -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
    };

    let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(k);
    centroids.push(points[rng.gen_range(0..n)].clone());
    while centroids.len() < k {
        let d: Vec<f64> = points
            .iter()
            .map(|p| {
                centroids
                    .iter()
                    .map(|c| dist2(p, c))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let total: f64 = d.iter().sum();
        let idx = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &w) in d.iter().enumerate() {
                if target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        } else {
            rng.gen_range(0..n)
        };
        centroids.push(points[idx].clone());
    }

    let mut labels = vec![0usize; n];
    for _ in 0..100 {
        let mut changed = false;
        for (i, p) in points.iter().enumerate() {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (c, centroid) in centroids.iter().enumerate() {
                let d = dist2(p, centroid);
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            if labels[i] != best {
                labels[i] = best;
                changed = true;
            }
        }
        let mut counts = vec![0usize; k];
        let mut sums = vec![vec![0.0; dim]; k];
        for (p, &l) in points.iter().zip(&labels) {
            counts[l] += 1;
            for (s, x) in sums[l].iter_mut().zip(p) {
                *s += x;
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                // Reseed an empty cluster with the point farthest from its centroid.
                let far = (0..n)
                    .max_by(|&a, &b| {
                        dist2(&points[a], &centroids[labels[a]])
                            .total_cmp(&dist2(&points[b], &centroids[labels[b]]))
                    })
                    .unwrap();
                centroids[c] = points[far].clone();
                changed = true;
            } else {
                for (j, s) in sums[c].iter().enumerate() {
                    centroids[c][j] = s / counts[c] as f64;
                }
            }
        }
        if !changed {
            break;
        }
    }
    labels
}

/// Renumbers labels by order of first appearance, making the output
/// independent of centroid initialization order.
fn canonicalize(labels: &[usize]) -> Vec<usize> {
    let mut map: std::collections::HashMap<usize, usize> = Default::default();
    let mut next = 0usize;
    labels
        .iter()
        .map(|&l| {
            *map.entry(l).or_insert_with(|| {
                let id = next;
                next += 1;
                id
            })
        })
        .collect()
}
