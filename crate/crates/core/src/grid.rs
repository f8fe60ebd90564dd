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


//! Sweeps over `(alpha, beta, gamma)` on a shared bank.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel_bank::KernelBank;
use crate::metrics::evaluate;
use crate::solver::{solve, SolverConfig};
use crate::spectral::{cluster_graph, ClusterOptions};

/// Default `beta` and `gamma` values.
pub const DEFAULT_BETA_GAMMA: [f64; 6] = [1e-5, 1e-3, 1e-1, 10.0, 1e3, 1e5];
/// Default `alpha` values.
pub const DEFAULT_ALPHA: [f64; 2] = [1e-5, 1e-2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA.to_vec(),
            beta: DEFAULT_BETA_GAMMA.to_vec(),
            gamma: DEFAULT_BETA_GAMMA.to_vec(),
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, vals) in [("alpha", &self.alpha), ("beta", &self.beta), ("gamma", &self.gamma)] {
            if vals.is_empty() {
                return Err(Error::InvalidConfig(format!("grid {name} list is empty")));
            }
            if let Some(v) = vals.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
                return Err(Error::InvalidConfig(format!("grid {name} value {v} is not positive")));
            }
        }
        Ok(())
    }

    /// All tuples, alpha outermost and gamma innermost.
    pub fn tuples(&self) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::with_capacity(self.len());
        for &a in &self.alpha {
            for &b in &self.beta {
                for &g in &self.gamma {
                    out.push((a, b, g));
                }
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.alpha.len() * self.beta.len() * self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// One grid cell. A failed run keeps its parameters and records the error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub acc: Option<f64>,
    pub nmi: Option<f64>,
    pub iterations: Option<usize>,
    pub converged: Option<bool>,
    pub error: Option<String>,
}

/// Everything except the swept parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct GridContext<'a> {
    pub bank: &'a KernelBank,
    pub truth: &'a [usize],
    pub base: SolverConfig,
    pub k: usize,
    pub cluster: ClusterOptions,
}

impl GridContext<'_> {
    pub fn run_tuple(&self, (alpha, beta, gamma): (f64, f64, f64)) -> GridRow {
        let config = SolverConfig {
            alpha,
            beta,
            gamma,
            ..self.base.clone()
        };
        let result = solve(self.bank, &config).and_then(|out| {
            let cl = cluster_graph(&out.z, self.k, &self.cluster)?;
            let m = evaluate(self.truth, &cl.labels)?;
            Ok((m, out.iterations, out.converged))
        });
        match result {
            Ok((m, iterations, converged)) => GridRow {
                alpha,
                beta,
                gamma,
                acc: Some(m.acc),
                nmi: Some(m.nmi),
                iterations: Some(iterations),
                converged: Some(converged),
                error: None,
            },
            Err(e) => {
                log::warn!("grid tuple ({alpha:e}, {beta:e}, {gamma:e}) failed: {e}");
                GridRow {
                    alpha,
                    beta,
                    gamma,
                    acc: None,
                    nmi: None,
                    iterations: None,
                    converged: None,
                    error: Some(e.to_string()),
                }
            }
        }
    }
}

/// Runs every tuple of `grid` on up to `threads` workers (all cores when
/// `None`). Rows come back in [`GridSpec::tuples`] order.
pub fn grid_search(ctx: &GridContext<'_>, grid: &GridSpec, threads: Option<usize>) -> Result<Vec<GridRow>> {
    let order: Vec<usize> = (0..grid.len()).collect();
    grid_search_in_order(ctx, grid, threads, &order)
}

/// Like [`grid_search`], but dispatches tuples in the given permutation of
/// `0..grid.len()`. The returned table does not depend on it.
pub fn grid_search_in_order(
    ctx: &GridContext<'_>,
    grid: &GridSpec,
    threads: Option<usize>,
    order: &[usize],
) -> Result<Vec<GridRow>> {
    grid.validate()?;
    ctx.base.validate()?;
    let tuples = grid.tuples();
    let mut seen = vec![false; tuples.len()];
    for &i in order {
        if i >= tuples.len() || std::mem::replace(&mut seen[i], true) {
            return Err(Error::InvalidInput(format!("order is not a permutation of 0..{}", tuples.len())));
        }
    }
    if order.len() != tuples.len() {
        return Err(Error::InvalidInput(format!("order is not a permutation of 0..{}", tuples.len())));
    }

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot build worker pool: {e}")))?;
    let mut done: Vec<(usize, GridRow)> = pool.install(|| {
        order
            .par_iter()
            .map(|&i| (i, ctx.run_tuple(tuples[i])))
            .collect()
    });
    done.sort_by_key(|(i, _)| *i);
    Ok(done.into_iter().map(|(_, row)| row).collect())
}

/// CSV with columns `alpha,beta,gamma,acc,nmi,iterations,converged,error`.
/// Missing values are empty fields.
pub fn write_grid_csv<W: Write>(out: W, rows: &[GridRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["alpha", "beta", "gamma", "acc", "nmi", "iterations", "converged", "error"])?;
    let opt = |v: Option<String>| v.unwrap_or_default();
    for r in rows {
        w.write_record([
            r.alpha.to_string(),
            r.beta.to_string(),
            r.gamma.to_string(),
            opt(r.acc.map(|v| v.to_string())),
            opt(r.nmi.map(|v| v.to_string())),
            opt(r.iterations.map(|v| v.to_string())),
            opt(r.converged.map(|v| v.to_string())),
            opt(r.error.clone()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_grid_file(path: &Path, rows: &[GridRow]) -> Result<()> {
    write_grid_csv(std::fs::File::create(path)?, rows)
}
