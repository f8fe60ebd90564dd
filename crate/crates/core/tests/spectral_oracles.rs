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


mod common;

use common::{matched_by_enumeration, rng, uniform_matrix};
use kergraph::kernel_bank::build_standard_bank;
use kergraph::metrics::accuracy;
use kergraph::solver::{solve, SolverConfig};
use kergraph::spectral::{cluster_graph, kmeans, spectral_embed, symmetrize_affinity, ClusterOptions};
use kergraph::synthetic::three_blobs;
use nalgebra::DMatrix;
use rand::Rng;

#[test]
fn affinity_is_exact_average() {
    let mut r = rng(60);
    for _ in 0..10 {
        let z = uniform_matrix(&mut r, 7, 7, 0.0, 2.0);
        let g = symmetrize_affinity(&z).unwrap();
        for i in 0..7 {
            for j in 0..7 {
                assert_eq!(g.matrix()[(i, j)], (z[(i, j)] + z[(j, i)]) / 2.0);
            }
            let deg: f64 = (0..7).map(|j| g.matrix()[(i, j)]).sum();
            assert!((g.degree()[i] - deg).abs() < 1e-14);
        }
        let s = g.matrix().clone();
        assert_eq!(symmetrize_affinity(&s).unwrap().matrix(), &s);
    }
}

#[test]
fn laplacian_spectrum_lies_in_zero_two() {
    let mut r = rng(61);
    for _ in 0..20 {
        let n = r.random_range(3..12);
        let z = uniform_matrix(&mut r, n, n, 0.0, 1.0);
        let g = symmetrize_affinity(&z).unwrap();
        let e = spectral_embed(&g, n).unwrap();
        assert!(e.eigenvalues.iter().all(|&v| (-1e-10..=2.0 + 1e-10).contains(&v)));
        assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        for row in e.coords.row_iter() {
            let norm = row.norm();
            assert!((norm - 1.0).abs() < 1e-12 || norm == 0.0);
        }
    }
}

#[test]
fn kmeans_recovers_separated_blobs() {
    let mut r = rng(62);
    let centers = [[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]];
    let truth: Vec<usize> = (0..12).map(|i| i % 3).collect();
    let pts = DMatrix::from_fn(12, 2, |i, c| centers[truth[i]][c] + r.random_range(-1.0..1.0));
    let km = kmeans(&pts, 3, 5, 0).unwrap();
    assert_eq!(matched_by_enumeration(&truth, &km.labels), 12);
    let again = kmeans(&pts, 3, 5, 0).unwrap();
    assert_eq!(km, again);
}

#[test]
fn kmeans_wcss_of_single_cluster_is_variance_sum() {
    let pts = DMatrix::from_row_slice(4, 2, &[1.0, 1.0, 1.0, 1.0, 3.0, 1.0, 3.0, 5.0]);
    let km = kmeans(&pts, 1, 3, 1).unwrap();
    assert_eq!(km.labels, vec![0; 4]);
    // Mean (2, 2); squared deviations 2 + 2 + 2 + 10.
    assert!((km.wcss - 16.0).abs() < 1e-12);
}

#[test]
fn labels_follow_a_consistent_reordering() {
    let mut r = rng(63);
    let n = 18;
    let block = |i: usize| i / 6;
    let z = DMatrix::from_fn(n, n, |i, j| {
        if block(i) == block(j) {
            1.0
        } else {
            0.02 * r.random::<f64>()
        }
    });
    let perm: Vec<usize> = {
        let mut p: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            p.swap(i, r.random_range(0..=i));
        }
        p
    };
    let zp = DMatrix::from_fn(n, n, |i, j| z[(perm[i], perm[j])]);
    let opts = ClusterOptions { restarts: 10, seed: 3 };
    let a = cluster_graph(&z, 3, &opts).unwrap().labels;
    let b = cluster_graph(&zp, 3, &opts).unwrap().labels;
    let a_perm: Vec<usize> = perm.iter().map(|&i| a[i]).collect();
    assert_eq!(accuracy(&a_perm, &b).unwrap(), 1.0);
    let truth: Vec<usize> = (0..n).map(block).collect();
    assert_eq!(accuracy(&truth, &a).unwrap(), 1.0);
}

#[test]
fn learned_graph_clusters_blobs() {
    for seed in 0..5 {
        let (x, truth) = three_blobs(60, 6.0, seed).unwrap();
        let bank = build_standard_bank(&x).unwrap();
        let cfg = SolverConfig {
            seed,
            ..SolverConfig::default()
        };
        let out = solve(&bank, &cfg).unwrap();
        let labels = cluster_graph(&out.z, 3, &ClusterOptions { restarts: 20, seed }).unwrap().labels;
        assert!(accuracy(&truth, &labels).unwrap() >= 0.95, "seed {seed}");
    }
}
