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


// The kernel-weight subproblem: a convex quadratic over the probability
// simplex, solved for a fixed consensus kernel.

use kergraph::error::Result;
use kergraph::kernel_bank::{build_bank, KernelSpec};
use kergraph::synthetic::three_blobs;
use kergraph::weights::{build_qp_coefficients, solve_simplex_qp, LinearTermConvention};
use nalgebra::DVector;

pub fn run_example() -> Result<()> {
    let (x, _) = three_blobs(24, 6.0, 1)?;
    let specs: Vec<KernelSpec> = ["gaussian:0.1", "gaussian:10", "poly:1:2"]
        .iter()
        .map(|s| s.parse())
        .collect::<Result<_>>()?;
    let bank = build_bank(&x, &specs)?;

    // A target kernel that leans on the first member.
    let k = bank.combine(&[0.7, 0.2, 0.1]);
    let qp = build_qp_coefficients(&bank, &k, 10.0, LinearTermConvention::Expanded)?;
    let sol = solve_simplex_qp(&qp, &[1.0 / 3.0; 3]);
    println!("g = {:?}", sol.g);
    println!("objective {:.6e} after {} iterations", sol.objective, sol.iterations);

    let grad = qp.gradient(&DVector::from_vec(sol.g.clone()));
    println!("gradient on the support {:?}", grad.as_slice());
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
