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


// A small (alpha, beta, gamma) sweep over a shared bank, written as a CSV
// surface.

use kergraph::error::Result;
use kergraph::grid::{grid_search, write_grid_csv, GridContext, GridSpec};
use kergraph::kernel_bank::build_standard_bank;
use kergraph::solver::SolverConfig;
use kergraph::spectral::ClusterOptions;
use kergraph::synthetic::three_blobs;

pub fn run_example() -> Result<()> {
    let (x, truth) = three_blobs(30, 6.0, 2)?;
    let bank = build_standard_bank(&x)?;
    let grid = GridSpec {
        alpha: vec![1e-2],
        beta: vec![1e-3, 1e-1],
        gamma: vec![1e-1, 10.0],
    };
    let ctx = GridContext {
        bank: &bank,
        truth: &truth,
        base: SolverConfig::default(),
        k: 3,
        cluster: ClusterOptions::default(),
    };
    let rows = grid_search(&ctx, &grid, Some(2))?;
    let mut out = Vec::new();
    write_grid_csv(&mut out, &rows)?;
    print!("{}", String::from_utf8_lossy(&out));
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
