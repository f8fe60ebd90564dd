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


//! End-to-end experiments: load, build kernels, solve, cluster, score and
//! write reports.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::cache::{load_bank, read_matrices, save_bank, write_matrices, CacheHeader};
use crate::data::{load_dataset, Dataset, DatasetSpec};
use crate::error::{Error, Result, Stage, StageExt};
use crate::kernel_bank::{build_bank, FeatureMatrix, KernelBank, KernelSpec};
use crate::metrics::{evaluate, MetricReport};
use crate::solver::{solve, write_trace_file, IterationRecord, SolverConfig, SolverMode};
use crate::spectral::{cluster_graph, ClusterOptions};

/// Environment variable capping the worker pool.
pub const THREADS_ENV: &str = "KERGRAPH_THREADS";

/// The kernel used by fixed-kernel mode when no explicit recipe is given.
pub const FIXED_MODE_DEFAULT_KERNEL: KernelSpec = KernelSpec::Gaussian { t: 1.0 };

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelRecipe {
    /// The twelve standard kernels in multi-kernel mode, or
    /// [`FIXED_MODE_DEFAULT_KERNEL`] in fixed-kernel mode.
    #[default]
    Standard,
    Explicit(Vec<KernelSpec>),
}

impl KernelRecipe {
    pub fn specs(&self, mode: SolverMode) -> Vec<KernelSpec> {
        match (self, mode) {
            (KernelRecipe::Explicit(s), _) => s.clone(),
            (KernelRecipe::Standard, SolverMode::MultiKernel) => KernelSpec::standard_recipe(),
            (KernelRecipe::Standard, SolverMode::FixedKernel) => vec![FIXED_MODE_DEFAULT_KERNEL],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub dataset: DatasetSpec,
    pub kernels: KernelRecipe,
    /// Standardize each feature before building kernels.
    pub scale: bool,
    pub solver: SolverConfig,
    /// Number of clusters. `None` takes the number of classes in the labels.
    pub k: Option<usize>,
    pub restarts: usize,
    /// k-means seed. `None` reuses the solver seed.
    pub cluster_seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    /// Kernel cache file, reused when its dataset hash and specs match.
    pub kernel_cache: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dataset: DatasetSpec::default(),
            kernels: KernelRecipe::Standard,
            scale: false,
            solver: SolverConfig::default(),
            k: None,
            restarts: ClusterOptions::default().restarts,
            cluster_seed: None,
            out_dir: None,
            kernel_cache: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        Ok(serde_json::from_reader(File::open(path)?)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.solver.validate()?;
        if let Some(k) = self.k {
            if k < 2 {
                return Err(Error::InvalidConfig(format!("k must be at least 2, got {k}")));
            }
        }
        if self.restarts < 1 {
            return Err(Error::InvalidConfig("restarts must be at least 1".into()));
        }
        if let KernelRecipe::Explicit(s) = &self.kernels {
            if s.is_empty() {
                return Err(Error::InvalidConfig("explicit kernel list is empty".into()));
            }
            for spec in s {
                spec.validate()?;
            }
        }
        if !self.dataset.path.exists() {
            return Err(Error::InvalidConfig(format!(
                "dataset {} does not exist",
                self.dataset.path.display()
            )));
        }
        Ok(())
    }

    pub fn cluster_options(&self) -> ClusterOptions {
        ClusterOptions {
            restarts: self.restarts,
            seed: self.cluster_seed.unwrap_or(self.solver.seed),
        }
    }

    /// Resolves the cluster count against the available labels.
    pub fn resolve_k(&self, labels: Option<&[usize]>) -> Result<usize> {
        let k = match (self.k, labels) {
            (Some(k), _) => k,
            (None, Some(l)) => l.iter().max().map_or(0, |m| m + 1),
            (None, None) => {
                return Err(Error::InvalidConfig(
                    "k must be given when the dataset has no labels".into(),
                ))
            }
        };
        if k < 2 {
            return Err(Error::InvalidConfig(format!("k must be at least 2, got {k}")));
        }
        Ok(k)
    }
}

/// Residual and objective values of the last iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub res_jz: f64,
    pub res_wk: f64,
    pub lagrangian: f64,
}

/// Everything a run reports. Serializes deterministically: no timestamps
/// and no host-dependent fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringReport {
    pub mode: SolverMode,
    pub n: usize,
    pub k: usize,
    pub r: usize,
    pub specs: Vec<KernelSpec>,
    pub dataset_hash: String,
    pub solver: SolverConfig,
    pub cluster: ClusterOptions,
    pub g: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub qp_failures: usize,
    pub last: Option<TraceSummary>,
    pub eigenvalues: Vec<f64>,
    pub near_degenerate: bool,
    pub labels: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<MetricReport>,
}

/// A report plus the artifacts too large to embed in it.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub report: ClusteringReport,
    pub z: DMatrix<f64>,
    pub trace: Vec<IterationRecord>,
}

/// Applies the scaling option and returns the matrix kernels are built from.
pub fn prepare_features(x: &FeatureMatrix, scale: bool) -> FeatureMatrix {
    if scale {
        x.standardized()
    } else {
        x.clone()
    }
}

/// Builds the bank, or loads it from `cache` when the file holds the same
/// specs for the same features. A fresh bank is written back to `cache`.
pub fn obtain_bank(x: &FeatureMatrix, specs: &[KernelSpec], cache: Option<&Path>) -> Result<KernelBank> {
    let hash = x.content_hash();
    if let Some(path) = cache.filter(|p| p.exists()) {
        let (header, bank) = load_bank(path)?;
        if header.dataset_hash == hash && header.specs == specs && header.n == x.n_samples() {
            log::info!("reusing kernel cache {}", path.display());
            return Ok(bank);
        }
        log::warn!("kernel cache {} is stale; rebuilding", path.display());
    }
    let bank = build_bank(x, specs)?;
    if let Some(path) = cache {
        save_bank(path, &bank, &hash)?;
    }
    Ok(bank)
}

/// Solve, cluster and score on a prepared bank.
pub fn run_on_bank(
    bank: &KernelBank,
    truth: Option<&[usize]>,
    solver: &SolverConfig,
    k: usize,
    cluster: &ClusterOptions,
    dataset_hash: &str,
) -> Result<ExperimentOutput> {
    let out = solve(bank, solver).stage(Stage::Solve)?;
    let clustering = cluster_graph(&out.z, k, cluster).stage(Stage::Cluster)?;
    let metrics = truth
        .map(|t| evaluate(t, &clustering.labels))
        .transpose()
        .stage(Stage::Evaluate)?;
    let report = ClusteringReport {
        mode: solver.mode,
        n: bank.n(),
        k,
        r: bank.r(),
        specs: bank.specs(),
        dataset_hash: dataset_hash.to_string(),
        solver: solver.clone(),
        cluster: *cluster,
        g: out.g.clone(),
        iterations: out.iterations,
        converged: out.converged,
        qp_failures: out.qp_failures,
        last: out.trace.last().map(|t| TraceSummary {
            res_jz: t.res_jz,
            res_wk: t.res_wk,
            lagrangian: t.lagrangian,
        }),
        eigenvalues: clustering.eigenvalues,
        near_degenerate: clustering.near_degenerate,
        labels: clustering.labels,
        metrics,
    };
    Ok(ExperimentOutput {
        report,
        z: out.z,
        trace: out.trace,
    })
}

/// Runs on an already loaded dataset.
pub fn run_on_dataset(data: &Dataset, config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.solver.validate()?;
    let k = config.resolve_k(data.labels.as_deref())?;
    let x = prepare_features(&data.features, config.scale);
    let specs = config.kernels.specs(config.solver.mode);
    let bank = obtain_bank(&x, &specs, config.kernel_cache.as_deref()).stage(Stage::Kernels)?;
    run_on_bank(
        &bank,
        data.labels.as_deref(),
        &config.solver,
        k,
        &config.cluster_options(),
        &x.content_hash(),
    )
}

/// Loads the dataset, runs, and writes the report when `out_dir` is set.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let data = load_dataset(&config.dataset).stage(Stage::Load)?;
    let output = run_on_dataset(&data, config)?;
    if let Some(dir) = &config.out_dir {
        write_report(&output, dir).stage(Stage::Write)?;
    }
    Ok(output)
}

/// Paths written by [`write_report`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportPaths {
    pub report: PathBuf,
    pub labels: PathBuf,
    pub trace: Option<PathBuf>,
    pub graph: PathBuf,
    pub meta: PathBuf,
}

impl ReportPaths {
    pub fn all(&self) -> Vec<&Path> {
        let mut v = vec![self.report.as_path(), self.labels.as_path()];
        if let Some(t) = &self.trace {
            v.push(t);
        }
        v.push(&self.graph);
        v.push(&self.meta);
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub created_unix_secs: u64,
    pub crate_version: String,
}

/// Writes `report.json`, `labels.csv` (one label per line), `trace.csv`
/// when a trace exists, `z.bin` in the cache format, and `meta.json`
/// holding the timestamp.
pub fn write_report(output: &ExperimentOutput, dir: &Path) -> Result<ReportPaths> {
    fs::create_dir_all(dir)?;
    let report = dir.join("report.json");
    let mut w = BufWriter::new(File::create(&report)?);
    serde_json::to_writer_pretty(&mut w, &output.report)?;
    w.write_all(b"\n")?;
    w.flush()?;

    let labels = dir.join("labels.csv");
    let mut w = BufWriter::new(File::create(&labels)?);
    for l in &output.report.labels {
        writeln!(w, "{l}")?;
    }
    w.flush()?;

    let trace = if output.trace.is_empty() {
        None
    } else {
        let p = dir.join("trace.csv");
        write_trace_file(&p, &output.trace)?;
        Some(p)
    };

    let graph = dir.join("z.bin");
    let header = CacheHeader {
        n: output.z.nrows(),
        r: 1,
        specs: Vec::new(),
        dataset_hash: output.report.dataset_hash.clone(),
    };
    write_matrices(&graph, &header, &[&output.z])?;

    let meta = dir.join("meta.json");
    let created = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    let md = RunMetadata {
        created_unix_secs: created,
        crate_version: env!("CARGO_PKG_VERSION").to_string(),
    };
    serde_json::to_writer_pretty(File::create(&meta)?, &md)?;

    Ok(ReportPaths {
        report,
        labels,
        trace,
        graph,
        meta,
    })
}

pub fn read_report(path: &Path) -> Result<ClusteringReport> {
    Ok(serde_json::from_reader(File::open(path)?)?)
}

/// Reads a graph written by [`write_report`].
pub fn read_graph(path: &Path) -> Result<DMatrix<f64>> {
    let (_, mut mats) = read_matrices(path)?;
    match mats.len() {
        1 => Ok(mats.remove(0)),
        n => Err(Error::Cache {
            path: path.to_path_buf(),
            message: format!("expected one matrix, found {n}"),
        }),
    }
}

/// Worker count from `KERGRAPH_THREADS`, if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}
