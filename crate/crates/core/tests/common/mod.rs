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


//! Independent reference implementations used by the integration tests.
//! Nothing here calls into the code under test except for data types.

#![allow(dead_code)]

use kergraph::kernel_bank::{KernelBank, KernelMatrix, KernelSpec};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, lo: f64, hi: f64) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(lo..hi))
}

pub fn symmetric_matrix(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> DMatrix<f64> {
    let a = uniform_matrix(rng, n, n, lo, hi);
    (&a + a.transpose()) * 0.5
}

/// Random PSD matrix `B^T B` scaled so its largest entry is 1.
pub fn psd_unit_max(rng: &mut ChaCha8Rng, n: usize, rank: usize) -> DMatrix<f64> {
    let b = uniform_matrix(rng, rank, n, 0.0, 1.0);
    let m = b.transpose() * b;
    let max = m.max();
    m / max
}

/// A bank of `r` random normalized PSD kernels.
pub fn random_bank(rng: &mut ChaCha8Rng, n: usize, r: usize) -> KernelBank {
    let kernels = (0..r)
        .map(|i| {
            let m = psd_unit_max(rng, n, 1 + i % n);
            KernelMatrix::new(m, KernelSpec::Precomputed { name: format!("h{i}") }).unwrap()
        })
        .collect();
    KernelBank::from_raw(kernels).unwrap()
}

pub fn frob2(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|v| v * v).sum()
}

pub fn l1(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|v| v.abs()).sum()
}

/// Singular values, largest first, from the eigenvalues of the symmetric
/// dilation `[[0, M], [M^T, 0]]`, avoiding the SVD path.
pub fn singular_values_oracle(m: &DMatrix<f64>) -> Vec<f64> {
    let (r, c) = m.shape();
    let mut dil = DMatrix::zeros(r + c, r + c);
    dil.view_mut((0, r), (r, c)).copy_from(m);
    dil.view_mut((r, 0), (c, r)).copy_from(&m.transpose());
    let mut ev: Vec<f64> = SymmetricEigen::new(dil).eigenvalues.iter().cloned().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev.truncate(r.min(c));
    ev.into_iter().map(|v| v.max(0.0)).collect()
}

/// Half the absolute eigenvalue sum of the dilation.
pub fn nuclear_oracle(m: &DMatrix<f64>) -> f64 {
    let (r, c) = m.shape();
    let mut dil = DMatrix::zeros(r + c, r + c);
    dil.view_mut((0, r), (r, c)).copy_from(m);
    dil.view_mut((r, 0), (c, r)).copy_from(&m.transpose());
    0.5 * dil.symmetric_eigenvalues().iter().map(|v| v.abs()).sum::<f64>()
}

pub fn trace_of_product(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut t = 0.0;
    for i in 0..n {
        for k in 0..a.ncols() {
            t += a[(i, k)] * b[(k, i)];
        }
    }
    t
}

pub struct LagrangianInputs<'a> {
    pub k: &'a DMatrix<f64>,
    pub z: &'a DMatrix<f64>,
    pub j: &'a DMatrix<f64>,
    pub w: &'a DMatrix<f64>,
    pub y1: &'a DMatrix<f64>,
    pub y2: &'a DMatrix<f64>,
    pub g: &'a [f64],
    pub kernels: &'a [DMatrix<f64>],
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub mu: f64,
    pub low_rank: bool,
}

/// The augmented Lagrangian in completed-square form, summed entry by
/// entry: `1/2 Tr(K) - Tr(KZ) + 1/2 Tr(Z^T K Z) + alpha rho(J) + beta |W|_*
///  + gamma |K - sum g_i H_i|^2 + mu/2 |J - Z + Y1/mu|^2 + mu/2 |W - K + Y2/mu|^2`.
pub fn lagrangian_oracle(p: &LagrangianInputs<'_>) -> f64 {
    let n = p.k.nrows();
    let mut value = 0.5 * p.k.trace() - trace_of_product(p.k, p.z);
    let kz = p.k * p.z;
    for c in 0..n {
        for i in 0..n {
            value += 0.5 * p.z[(i, c)] * kz[(i, c)];
        }
    }
    value += p.alpha * if p.low_rank { nuclear_oracle(p.j) } else { l1(p.j) };
    value += p.beta * nuclear_oracle(p.w);
    for i in 0..n {
        for c in 0..n {
            let combo: f64 = p.g.iter().zip(p.kernels).map(|(gi, h)| gi * h[(i, c)]).sum();
            let d = p.k[(i, c)] - combo;
            let a = p.j[(i, c)] - p.z[(i, c)] + p.y1[(i, c)] / p.mu;
            let b = p.w[(i, c)] - p.k[(i, c)] + p.y2[(i, c)] / p.mu;
            value += p.gamma * d * d + 0.5 * p.mu * (a * a + b * b);
        }
    }
    value
}

/// Central-difference gradient of `f` at `x`.
pub fn central_gradient<F: Fn(&DMatrix<f64>) -> f64>(f: F, x: &DMatrix<f64>, h: f64) -> DMatrix<f64> {
    let mut grad = DMatrix::zeros(x.nrows(), x.ncols());
    let mut xp = x.clone();
    for idx in 0..x.len() {
        let orig = xp[idx];
        xp[idx] = orig + h;
        let fp = f(&xp);
        xp[idx] = orig - h;
        let fm = f(&xp);
        xp[idx] = orig;
        grad[idx] = (fp - fm) / (2.0 * h);
    }
    grad
}

/// All permutations of `0..n` (Heap's algorithm).
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn heap(k: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(a.clone());
            return;
        }
        heap(k - 1, a, out);
        for i in 0..k - 1 {
            if k % 2 == 0 {
                a.swap(i, k - 1);
            } else {
                a.swap(0, k - 1);
            }
            heap(k - 1, a, out);
        }
    }
    let mut a: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    heap(n, &mut a, &mut out);
    out
}

/// Best matched count over every bijection between the (padded) cluster and
/// class index sets.
pub fn matched_by_enumeration(truth: &[usize], pred: &[usize]) -> usize {
    let c = truth.iter().chain(pred).max().map_or(0, |m| m + 1);
    permutations(c)
        .iter()
        .map(|p| truth.iter().zip(pred).filter(|(t, q)| p[**q] == **t).count())
        .max()
        .unwrap_or(0)
}

pub struct PairCounts {
    pub tp: f64,
    pub fp: f64,
    pub fn_: f64,
    pub tn: f64,
}

/// Counts over all unordered sample pairs.
pub fn pair_counts(truth: &[usize], pred: &[usize]) -> PairCounts {
    let mut c = PairCounts {
        tp: 0.0,
        fp: 0.0,
        fn_: 0.0,
        tn: 0.0,
    };
    for i in 0..truth.len() {
        for j in i + 1..truth.len() {
            match (truth[i] == truth[j], pred[i] == pred[j]) {
                (true, true) => c.tp += 1.0,
                (false, true) => c.fp += 1.0,
                (true, false) => c.fn_ += 1.0,
                (false, false) => c.tn += 1.0,
            }
        }
    }
    c
}

/// Rand index adjusted for chance from pair counts.
pub fn ari_from_pairs(c: &PairCounts) -> f64 {
    let total = c.tp + c.fp + c.fn_ + c.tn;
    let same_pred = c.tp + c.fp;
    let same_truth = c.tp + c.fn_;
    let expected = same_pred * same_truth / total;
    let max = 0.5 * (same_pred + same_truth);
    if max == expected {
        1.0
    } else {
        (c.tp - expected) / (max - expected)
    }
}

/// Mutual information over max marginal entropy, from empirical
/// probabilities.
pub fn nmi_oracle(truth: &[usize], pred: &[usize]) -> f64 {
    let n = truth.len() as f64;
    let ct = truth.iter().max().unwrap() + 1;
    let cp = pred.iter().max().unwrap() + 1;
    let mut joint = vec![vec![0usize; cp]; ct];
    for (&t, &p) in truth.iter().zip(pred) {
        joint[t][p] += 1;
    }
    let pt: Vec<f64> = joint.iter().map(|r| r.iter().sum::<usize>() as f64 / n).collect();
    let pp: Vec<f64> = (0..cp)
        .map(|b| joint.iter().map(|r| r[b]).sum::<usize>() as f64 / n)
        .collect();
    let joint: Vec<Vec<f64>> = joint
        .iter()
        .map(|r| r.iter().map(|&c| c as f64 / n).collect())
        .collect();
    let h = |ps: &[f64]| -ps.iter().filter(|&&p| p > 0.0).map(|p| p * p.ln()).sum::<f64>();
    let mut mi = 0.0;
    for a in 0..ct {
        for b in 0..cp {
            let pab = joint[a][b];
            if pab > 0.0 {
                mi += pab * (pab / (pt[a] * pp[b])).ln();
            }
        }
    }
    let denom = h(&pt).max(h(&pp));
    if denom == 0.0 {
        1.0
    } else {
        mi / denom
    }
}

pub fn random_labels(rng: &mut ChaCha8Rng, n: usize, c: usize) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..c)).collect()
}
