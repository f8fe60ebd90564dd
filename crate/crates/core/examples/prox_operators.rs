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


// The proximal operators behind the J and W updates, and the simplex
// projection used for the kernel weights.

use kergraph::error::Result;
use kergraph::prox::{nuclear_norm, project_simplex, soft_threshold, svt, ThresholdedSvd};
use nalgebra::DMatrix;

pub fn run_example() -> Result<()> {
    let d = DMatrix::from_row_slice(2, 3, &[0.5, -0.05, 2.0, -1.2, 0.1, 0.0]);
    println!("soft_threshold(D, 0.2) = {}", soft_threshold(&d, 0.2));

    let g = DMatrix::from_fn(4, 4, |i, j| ((i * 4 + j) as f64).sin());
    let t = ThresholdedSvd::new(&g, 0.5)?;
    println!("singular values {:?}", t.sigma.as_slice());
    println!("after shrinkage {:?}", t.shrunk_values());
    let shrunk = svt(&g, 0.5)?;
    println!(
        "nuclear norm {:.4} -> {:.4}",
        nuclear_norm(&g)?,
        nuclear_norm(&shrunk)?
    );

    let p = project_simplex(&[0.9, 0.4, -0.3]);
    println!("simplex projection {p:?}, sum {}", p.iter().sum::<f64>());
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
