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


// Spectral clustering of an affinity matrix: normalized Laplacian
// embedding followed by restarted k-means.

use kergraph::error::Result;
use kergraph::spectral::{cluster_graph, spectral_embed, symmetrize_affinity, ClusterOptions};
use nalgebra::DMatrix;

pub fn run_example() -> Result<()> {
    // Three noisy cliques of sizes 4, 5 and 6 with weak cross links.
    let sizes = [4, 5, 6];
    let block = |i: usize| {
        let mut acc = 0;
        sizes.iter().position(|&s| {
            acc += s;
            i < acc
        })
    };
    let n = sizes.iter().sum();
    let z = DMatrix::from_fn(n, n, |i, j| {
        if block(i) == block(j) {
            1.0
        } else {
            0.01 * (((i * 7 + j * 3) % 5) as f64)
        }
    });

    let graph = symmetrize_affinity(&z)?;
    let emb = spectral_embed(&graph, 3)?;
    println!("bottom eigenvalues {:?}", emb.eigenvalues);

    let result = cluster_graph(&z, 3, &ClusterOptions { restarts: 10, seed: 1 })?;
    println!("labels {:?}", result.labels);
    println!("wcss {:.3e}, near degenerate {}", result.wcss, result.near_degenerate);
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
