// Copyright 2026 The kergraph Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Normalized spectral clustering of a learned graph.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const NEGATIVE_SLACK: f64 = 1e-12;
const KMEANS_MAX_ITER: usize = 300;
/// Eigengap below which the k-th eigenvector is considered ambiguous.
pub const DEGENERATE_GAP: f64 = 1e-8;

/// Symmetric nonnegative affinity with cached degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityGraph {
    a: DMatrix<f64>,
    degree: Vec<f64>,
}

impl AffinityGraph {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn degree(&self) -> &[f64] {
        &self.degree
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }
}

/// `A = (Z + Z^T) / 2`. Entries in `[-1e-12, 0)` are treated as zero.
pub fn symmetrize_affinity(z: &DMatrix<f64>) -> Result<AffinityGraph> {
    if !z.is_square() {
        return Err(Error::DimensionMismatch {
            context: "affinity columns",
            expected: z.nrows(),
            found: z.ncols(),
        });
    }
    let n = z.nrows();
    for col in 0..n {
        for row in 0..n {
            let value = z[(row, col)];
            if !value.is_finite() {
                return Err(Error::NonFinite("affinity input".into()));
            }
            if value < -NEGATIVE_SLACK {
                return Err(Error::NegativeInput { row, col, value });
            }
        }
    }
    let a = DMatrix::from_fn(n, n, |i, j| ((z[(i, j)] + z[(j, i)]) / 2.0).max(0.0));
    let degree = a.row_iter().map(|r| r.sum()).collect();
    Ok(AffinityGraph { a, degree })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralEmbedding {
    /// `n x k`, rows scaled to unit length.
    pub coords: DMatrix<f64>,
    /// The `k` smallest eigenvalues of `I - D^{-1/2} A D^{-1/2}`, ascending.
    pub eigenvalues: Vec<f64>,
    /// Rows that were zero before normalization and were left at zero.
    pub zero_rows: Vec<usize>,
    /// Whether eigenvalue `k` and `k + 1` are within [`DEGENERATE_GAP`].
    pub near_degenerate: bool,
}

/// Bottom-`k` eigenvectors of the symmetric normalized Laplacian. Vertices of
/// degree zero get a zero row in `D^{-1/2}`.
pub fn spectral_embed(graph: &AffinityGraph, k: usize) -> Result<SpectralEmbedding> {
    let n = graph.n();
    if k < 1 || k > n {
        return Err(Error::InvalidInput(format!(
            "embedding dimension k = {k} must lie in [1, {n}]"
        )));
    }
    let inv_sqrt: Vec<f64> = graph
        .degree
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 })
        .collect();
    let laplacian = DMatrix::from_fn(n, n, |i, j| {
        let off = graph.a[(i, j)] * inv_sqrt[i] * inv_sqrt[j];
        if i == j {
            1.0 - off
        } else {
            -off
        }
    });
    let eig = SymmetricEigen::try_new(laplacian, f64::EPSILON, 100_000).ok_or(Error::EigenFailure)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let eigenvalues: Vec<f64> = order[..k].iter().map(|&i| eig.eigenvalues[i]).collect();
    let near_degenerate =
        k < n && (eig.eigenvalues[order[k]] - eig.eigenvalues[order[k - 1]]).abs() < DEGENERATE_GAP;

    let mut coords = DMatrix::from_fn(n, k, |i, c| eig.eigenvectors[(i, order[c])]);
    let mut zero_rows = Vec::new();
    for (i, mut row) in coords.row_iter_mut().enumerate() {
        let norm = row.norm();
        if norm > 0.0 {
            row /= norm;
        } else {
            zero_rows.push(i);
        }
    }
    Ok(SpectralEmbedding {
        coords,
        eigenvalues,
        zero_rows,
        near_degenerate,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub labels: Vec<usize>,
    pub centers: DMatrix<f64>,
    /// Within-cluster sum of squared distances.
    pub wcss: f64,
    pub restart: usize,
}

fn sq_dist(points: &DMatrix<f64>, i: usize, centers: &DMatrix<f64>, c: usize) -> f64 {
    points
        .row(i)
        .iter()
        .zip(centers.row(c).iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum()
}

/// Greedy k-means++ seeding: each new center is the best of
/// `2 + ln k` candidates sampled proportionally to squared distance.
fn seed_centers(points: &DMatrix<f64>, k: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let n = points.nrows();
    let mut chosen = vec![rng.random_range(0..n)];
    let mut closest: Vec<f64> = (0..n)
        .map(|i| sq_dist(points, i, &points.rows(chosen[0], 1).into_owned(), 0))
        .collect();
    let trials = 2 + (k as f64).ln().floor() as usize;

    while chosen.len() < k {
        let total: f64 = closest.iter().sum();
        let next = if total <= 0.0 {
            // Every point coincides with a center; take the first unused index.
            (0..n).find(|i| !chosen.contains(i)).unwrap_or(0)
        } else {
            let mut best = None;
            for _ in 0..trials {
                let target = rng.random::<f64>() * total;
                let mut acc = 0.0;
                let mut cand = n - 1;
                for (i, &d) in closest.iter().enumerate() {
                    acc += d;
                    if acc > target {
                        cand = i;
                        break;
                    }
                }
                let potential: f64 = (0..n)
                    .map(|i| {
                        let d: f64 = points
                            .row(i)
                            .iter()
                            .zip(points.row(cand).iter())
                            .map(|(a, b)| (a - b) * (a - b))
                            .sum();
                        d.min(closest[i])
                    })
                    .sum();
                if best.is_none_or(|(_, p)| potential < p) {
                    best = Some((cand, potential));
                }
            }
            best.map(|(c, _)| c).unwrap_or(0)
        };
        chosen.push(next);
        for (i, c) in closest.iter_mut().enumerate() {
            let d: f64 = points
                .row(i)
                .iter()
                .zip(points.row(next).iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            *c = c.min(d);
        }
    }
    DMatrix::from_fn(k, points.ncols(), |c, f| points[(chosen[c], f)])
}

fn assign(points: &DMatrix<f64>, centers: &DMatrix<f64>, labels: &mut [usize], dists: &mut [f64]) -> bool {
    let mut changed = false;
    for i in 0..points.nrows() {
        let mut best = (0, f64::INFINITY);
        for c in 0..centers.nrows() {
            let d = sq_dist(points, i, centers, c);
            if d < best.1 {
                best = (c, d);
            }
        }
        if labels[i] != best.0 {
            labels[i] = best.0;
            changed = true;
        }
        dists[i] = best.1;
    }
    changed
}

/// Moves the point farthest from its center (taken from a cluster that has
/// more than one member) into each empty cluster.
fn fill_empty(points: &DMatrix<f64>, k: usize, labels: &mut [usize], dists: &mut [f64], centers: &mut DMatrix<f64>) {
    loop {
        let mut counts = vec![0usize; k];
        for &l in labels.iter() {
            counts[l] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return;
        };
        let donor = (0..labels.len())
            .filter(|&i| counts[labels[i]] > 1)
            .max_by(|&a, &b| dists[a].total_cmp(&dists[b]).then(b.cmp(&a)));
        let Some(i) = donor else {
            return;
        };
        labels[i] = empty;
        dists[i] = 0.0;
        centers.row_mut(empty).copy_from(&points.row(i));
    }
}

fn update_centers(points: &DMatrix<f64>, labels: &[usize], centers: &mut DMatrix<f64>) {
    let k = centers.nrows();
    let mut sums = DMatrix::zeros(k, points.ncols());
    let mut counts = vec![0usize; k];
    for (i, &l) in labels.iter().enumerate() {
        let mut row = sums.row_mut(l);
        row += points.row(i);
        counts[l] += 1;
    }
    for c in 0..k {
        if counts[c] > 0 {
            centers.row_mut(c).copy_from(&(sums.row(c) / counts[c] as f64));
        }
    }
}

fn lloyd(points: &DMatrix<f64>, k: usize, rng: &mut ChaCha8Rng, restart: usize) -> KMeansResult {
    let n = points.nrows();
    let mut centers = seed_centers(points, k, rng);
    let mut labels = vec![usize::MAX; n];
    let mut dists = vec![0.0; n];
    for _ in 0..KMEANS_MAX_ITER {
        let changed = assign(points, &centers, &mut labels, &mut dists);
        fill_empty(points, k, &mut labels, &mut dists, &mut centers);
        if !changed {
            break;
        }
        update_centers(points, &labels, &mut centers);
    }
    fill_empty(points, k, &mut labels, &mut dists, &mut centers);
    update_centers(points, &labels, &mut centers);
    let wcss = (0..n).map(|i| sq_dist(points, i, &centers, labels[i])).sum();
    KMeansResult {
        labels,
        centers,
        wcss,
        restart,
    }
}

/// Lloyd's k-means over the rows of `points`, keeping the restart with the
/// lowest WCSS (ties go to the lowest restart index). Restart `i` draws from
/// stream `i` of a ChaCha generator seeded with `seed`.
pub fn kmeans(points: &DMatrix<f64>, k: usize, restarts: usize, seed: u64) -> Result<KMeansResult> {
    let n = points.nrows();
    if k < 1 || k > n {
        return Err(Error::InvalidInput(format!("k = {k} must lie in [1, {n}]")));
    }
    if restarts < 1 {
        return Err(Error::InvalidInput("k-means needs at least one restart".into()));
    }
    if points.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("k-means input".into()));
    }
    let best = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            lloyd(points, k, &mut rng, r)
        })
        .reduce_with(|a, b| {
            if b.wcss < a.wcss || (b.wcss == a.wcss && b.restart < a.restart) {
                b
            } else {
                a
            }
        })
        .expect("at least one restart");
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterOptions {
    pub restarts: usize,
    pub seed: u64,
}

impl Default for ClusterOptions {
    fn default() -> Self {
        Self {
            restarts: 20,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphClustering {
    pub labels: Vec<usize>,
    pub eigenvalues: Vec<f64>,
    pub near_degenerate: bool,
    pub wcss: f64,
}

/// Symmetrize, embed, and run k-means on the embedding.
pub fn cluster_graph(z: &DMatrix<f64>, k: usize, opts: &ClusterOptions) -> Result<GraphClustering> {
    let graph = symmetrize_affinity(z)?;
    let embedding = spectral_embed(&graph, k)?;
    if embedding.near_degenerate {
        log::warn!("eigengap at k = {k} is below {DEGENERATE_GAP:e}; cluster labels may be unstable");
    }
    let km = kmeans(&embedding.coords, k, opts.restarts, opts.seed)?;
    Ok(GraphClustering {
        labels: km.labels,
        eigenvalues: embedding.eigenvalues,
        near_degenerate: embedding.near_degenerate,
        wcss: km.wcss,
    })
}
