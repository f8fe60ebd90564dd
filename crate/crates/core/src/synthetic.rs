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

//! Seeded synthetic datasets for examples and tests.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::kernel_bank::FeatureMatrix;

/// Isotropic gaussian clusters around `centers`, `per_cluster` samples each,
/// emitted cluster by cluster. Returns the features and the true labels.
pub fn gaussian_blobs(
    centers: &[Vec<f64>],
    per_cluster: usize,
    sigma: f64,
    seed: u64,
) -> Result<(FeatureMatrix, Vec<usize>)> {
    let dim = centers.first().map_or(0, Vec::len);
    if centers.iter().any(|c| c.len() != dim) {
        return Err(Error::InvalidInput("blob centers differ in dimension".into()));
    }
    let noise = Normal::new(0.0, sigma)
        .map_err(|e| Error::InvalidInput(format!("bad blob sigma {sigma}: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(centers.len() * per_cluster);
    let mut labels = Vec::with_capacity(centers.len() * per_cluster);
    for (c, center) in centers.iter().enumerate() {
        for _ in 0..per_cluster {
            samples.push(center.iter().map(|x| x + noise.sample(&mut rng)).collect());
            labels.push(c);
        }
    }
    Ok((FeatureMatrix::from_samples(&samples)?, labels))
}

/// Three 2-D blobs of unit spread on an equilateral triangle whose side is
/// `separation` standard deviations.
pub fn three_blobs(n: usize, separation: f64, seed: u64) -> Result<(FeatureMatrix, Vec<usize>)> {
    let h = separation * 3f64.sqrt() / 2.0;
    let centers = vec![
        vec![0.0, 0.0],
        vec![separation, 0.0],
        vec![separation / 2.0, h],
    ];
    gaussian_blobs(&centers, n / 3, 1.0, seed)
}
