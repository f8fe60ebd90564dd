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


//! Command-line front end: `build-kernels`, `cluster`, `grid`, `eval`.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use kergraph::cache::save_bank;
use kergraph::data::{load_dataset, read_labels, DataFormat, LabelColumn};
use kergraph::error::{Error, Result, Stage};
use kergraph::grid::{grid_search, write_grid_file, GridContext, GridSpec};
use kergraph::kernel_bank::{build_bank, KernelSpec};
use kergraph::metrics::evaluate;
use kergraph::pipeline::{
    obtain_bank, prepare_features, run_experiment, thread_cap, ExperimentConfig, KernelRecipe,
};
use kergraph::solver::{Regularizer, SolverMode};

#[derive(Parser)]
#[command(name = "kergraph", version, about = "Consensus-kernel graph learning for clustering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the kernel bank and write it to `<out>/kernels.bin`.
    BuildKernels(RunArgs),
    /// Learn the graph, cluster, and write a report to `<out>`.
    Cluster(RunArgs),
    /// Sweep (alpha, beta, gamma) and write `<out>/grid.csv`.
    Grid(GridArgs),
    /// Score predicted labels against ground truth.
    Eval(EvalArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum RegArg {
    Sparse,
    Lowrank,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Multi,
    Fixed,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Dense,
    Sparse,
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment config; flags given alongside override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dataset file.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// The first line of the dataset is a header.
    #[arg(long)]
    header: bool,
    /// Label column, by header name or zero-based index.
    #[arg(long, value_name = "NAME|INDEX")]
    label_col: Option<LabelColumn>,
    /// Separate label file, one label per line.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Standardize features before building kernels.
    #[arg(long)]
    scale: bool,
    /// Kernel spec (gaussian:T, linear, poly:A:B); repeat for several.
    #[arg(long = "kernel")]
    kernels: Vec<KernelSpec>,
    /// Kernel cache file to reuse or create.
    #[arg(long)]
    kernel_cache: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long, value_enum)]
    reg: Option<RegArg>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Number of clusters; defaults to the number of classes.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GridArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Comma-separated alpha values.
    #[arg(long, value_delimiter = ',')]
    alphas: Vec<f64>,
    /// Comma-separated beta values.
    #[arg(long, value_delimiter = ',')]
    betas: Vec<f64>,
    /// Comma-separated gamma values.
    #[arg(long, value_delimiter = ',')]
    gammas: Vec<f64>,
}

#[derive(Args)]
struct EvalArgs {
    /// Ground-truth labels, one per line.
    #[arg(long)]
    truth: PathBuf,
    /// Predicted labels, one per line.
    #[arg(long)]
    pred: PathBuf,
}

impl RunArgs {
    fn experiment(&self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(p) => ExperimentConfig::from_json_file(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(p) = &self.data {
            c.dataset.path = p.clone();
        }
        if let Some(f) = self.format {
            c.dataset.format = match f {
                FormatArg::Dense => DataFormat::Dense,
                FormatArg::Sparse => DataFormat::Sparse,
            };
        }
        c.dataset.header |= self.header;
        if let Some(l) = &self.label_col {
            c.dataset.label_col = Some(l.clone());
        }
        if let Some(p) = &self.labels {
            c.dataset.labels_path = Some(p.clone());
        }
        c.scale |= self.scale;
        if !self.kernels.is_empty() {
            c.kernels = KernelRecipe::Explicit(self.kernels.clone());
        }
        if let Some(p) = &self.kernel_cache {
            c.kernel_cache = Some(p.clone());
        }
        let s = &mut c.solver;
        s.alpha = self.alpha.unwrap_or(s.alpha);
        s.beta = self.beta.unwrap_or(s.beta);
        s.gamma = self.gamma.unwrap_or(s.gamma);
        s.mu = self.mu.unwrap_or(s.mu);
        s.tol = self.tol.unwrap_or(s.tol);
        s.max_iter = self.max_iter.unwrap_or(s.max_iter);
        s.seed = self.seed.unwrap_or(s.seed);
        if let Some(r) = self.reg {
            s.regularizer = match r {
                RegArg::Sparse => Regularizer::Sparse,
                RegArg::Lowrank => Regularizer::LowRank,
            };
        }
        if let Some(m) = self.mode {
            s.mode = match m {
                ModeArg::Multi => SolverMode::MultiKernel,
                ModeArg::Fixed => SolverMode::FixedKernel,
            };
        }
        if self.k.is_some() {
            c.k = self.k;
        }
        c.restarts = self.restarts.unwrap_or(c.restarts);
        if let Some(o) = &self.out {
            c.out_dir = Some(o.clone());
        }
        if c.dataset.path.as_os_str().is_empty() {
            return Err(Error::InvalidConfig("no dataset given (--data or --config)".into()));
        }
        c.validate()?;
        Ok(c)
    }
}

fn out_dir(c: &ExperimentConfig) -> PathBuf {
    c.out_dir.clone().unwrap_or_else(|| PathBuf::from("."))
}

fn build_kernels(args: &RunArgs) -> Result<()> {
    let c = args.experiment()?;
    let data = load_dataset(&c.dataset).map_err(|e| e.at(Stage::Load))?;
    let x = prepare_features(&data.features, c.scale);
    let bank = build_bank(&x, &c.kernels.specs(c.solver.mode)).map_err(|e| e.at(Stage::Kernels))?;
    let dir = out_dir(&c);
    fs::create_dir_all(&dir)?;
    let path = dir.join("kernels.bin");
    save_bank(&path, &bank, &x.content_hash()).map_err(|e| e.at(Stage::Write))?;
    for rec in bank.clip_log() {
        println!("clipped {} entries of {} (min {:e})", rec.clipped_entries, rec.spec, rec.most_negative);
    }
    println!("{}", path.display());
    Ok(())
}

fn cluster(args: &RunArgs) -> Result<()> {
    let mut c = args.experiment()?;
    c.out_dir = Some(out_dir(&c));
    let out = run_experiment(&c)?;
    let r = &out.report;
    println!(
        "mode={:?} r={} iterations={} converged={}",
        r.mode, r.r, r.iterations, r.converged
    );
    if let Some(m) = &r.metrics {
        println!("{}", serde_json::to_string(m)?);
    }
    Ok(())
}

fn grid(args: &GridArgs) -> Result<()> {
    let c = args.run.experiment()?;
    let data = load_dataset(&c.dataset).map_err(|e| e.at(Stage::Load))?;
    let truth = data
        .labels
        .as_deref()
        .ok_or_else(|| Error::InvalidConfig("grid search needs ground-truth labels".into()))?;
    let x = prepare_features(&data.features, c.scale);
    let bank = obtain_bank(&x, &c.kernels.specs(c.solver.mode), c.kernel_cache.as_deref())
        .map_err(|e| e.at(Stage::Kernels))?;
    let mut spec = GridSpec::default();
    for (dst, src) in [
        (&mut spec.alpha, &args.alphas),
        (&mut spec.beta, &args.betas),
        (&mut spec.gamma, &args.gammas),
    ] {
        if !src.is_empty() {
            *dst = src.clone();
        }
    }
    let ctx = GridContext {
        bank: &bank,
        truth,
        base: c.solver.clone(),
        k: c.resolve_k(Some(truth))?,
        cluster: c.cluster_options(),
    };
    let rows = grid_search(&ctx, &spec, thread_cap())?;
    let dir = out_dir(&c);
    fs::create_dir_all(&dir)?;
    let path = dir.join("grid.csv");
    write_grid_file(&path, &rows).map_err(|e| e.at(Stage::Write))?;
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    println!("{} rows ({failed} failed) -> {}", rows.len(), path.display());
    Ok(())
}

fn eval(args: &EvalArgs) -> Result<()> {
    let truth = read_labels(&args.truth)?;
    let pred = read_labels(&args.pred)?;
    let m = evaluate(&truth, &pred)?;
    println!("{}", serde_json::to_string_pretty(&m)?);
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Some(n) = thread_cap() {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("cannot cap worker pool: {e}");
        }
    }
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::BuildKernels(a) => build_kernels(a),
        Command::Cluster(a) => cluster(a),
        Command::Grid(a) => grid(a),
        Command::Eval(a) => eval(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
