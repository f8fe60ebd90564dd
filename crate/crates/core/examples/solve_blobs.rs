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


// Learns the consensus kernel and graph on three blobs with both graph
// regularizers, watching residuals and weights per iteration.

use kergraph::error::Result;
use kergraph::kernel_bank::build_standard_bank;
use kergraph::solver::{write_trace_csv, Regularizer, Solver, SolverConfig};
use kergraph::synthetic::three_blobs;

pub fn run_example() -> Result<()> {
    let (x, _) = three_blobs(45, 6.0, 3)?;
    let bank = build_standard_bank(&x)?;
    for regularizer in [Regularizer::Sparse, Regularizer::LowRank] {
        let config = SolverConfig {
            regularizer,
            ..SolverConfig::default()
        };
        let mut worst_sum_error: f64 = 0.0;
        let out = Solver::new(&bank, config)?.run_with(|state, _| {
            worst_sum_error = worst_sum_error.max((state.g.iter().sum::<f64>() - 1.0).abs());
        })?;
        let last = out.trace.last().expect("at least one iteration");
        println!(
            "{regularizer:?}: {} iterations, converged {}, |J-Z| {:.1e}, |W-K| {:.1e}, max |sum g - 1| {:.1e}",
            out.iterations, out.converged, last.res_jz, last.res_wk, worst_sum_error
        );
        let top = out
            .g
            .iter()
            .zip(bank.specs())
            .filter(|(g, _)| **g > 0.05)
            .map(|(g, s)| format!("{s}: {g:.2}"))
            .collect::<Vec<_>>();
        println!("  dominant kernels {top:?}");

        let mut csv = Vec::new();
        write_trace_csv(&mut csv, &out.trace[..3.min(out.trace.len())])?;
        print!("{}", String::from_utf8_lossy(&csv));
    }
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
