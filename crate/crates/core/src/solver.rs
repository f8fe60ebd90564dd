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

//! ADMM solver for the joint consensus-kernel / self-expressive-graph
//! problem
//!
//! ```text
//! min  1/2 Tr(K - 2KZ + Z^T K Z) + alpha rho(Z) + beta |K|_* + gamma |K - sum_i g_i H^i|_F^2
//! s.t. Z >= 0, K >= 0, g on the probability simplex
//! ```
//!
//! split with `J = Z` and `W = K`. One iteration updates, in order, `Z`,
//! `K`, `J` and `W` (each followed by elementwise clipping at zero), then the
//! kernel weights `g`, then the multipliers `Y1`, `Y2`.
//!
//! In [`SolverMode::FixedKernel`] the bank must hold a single kernel; `K` is
//! frozen to it and only `Z`, `J` and `Y1` move.

use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel_bank::{symmetrize, KernelBank};
use crate::prox::{clip_nonneg_in_place, nuclear_norm, soft_threshold, svt};
use crate::weights::{linear_term, solve_simplex_qp, trace_gram, LinearTermConvention, WeightQp};

/// Choice of `rho(Z)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regularizer {
    /// `|Z|_1`
    #[default]
    Sparse,
    /// `|Z|_*`
    #[serde(alias = "low_rank")]
    LowRank,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverMode {
    #[default]
    #[serde(alias = "multi")]
    MultiKernel,
    #[serde(alias = "fixed")]
    FixedKernel,
}

/// Geometric penalty growth `mu <- min(rho * mu, mu_max)` after each dual
/// step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveMu {
    pub rho: f64,
    pub mu_max: f64,
}

impl Default for AdaptiveMu {
    fn default() -> Self {
        Self {
            rho: 1.1,
            mu_max: 1e6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub mu: f64,
    pub regularizer: Regularizer,
    pub mode: SolverMode,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub adaptive_mu: Option<AdaptiveMu>,
    pub linear_term: LinearTermConvention,
    /// Upper bound of the uniform draw for the initial `J`. `None` means
    /// `1/n`.
    pub j_init_scale: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            alpha: 1e-2,
            beta: 1e-1,
            gamma: 10.0,
            mu: 1.0,
            regularizer: Regularizer::Sparse,
            mode: SolverMode::MultiKernel,
            tol: 1e-5,
            max_iter: 300,
            seed: 0,
            adaptive_mu: Some(AdaptiveMu::default()),
            linear_term: LinearTermConvention::Expanded,
            j_init_scale: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("mu", self.mu),
            ("tol", self.tol),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_iter < 1 {
            return Err(Error::InvalidConfig("max_iter must be at least 1".into()));
        }
        if let Some(c) = self.j_init_scale {
            if !(c.is_finite() && c >= 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "j_init_scale must be finite and nonnegative, got {c}"
                )));
            }
        }
        if let Some(a) = self.adaptive_mu {
            if !(a.rho >= 1.0 && a.mu_max >= self.mu) {
                return Err(Error::InvalidConfig(format!(
                    "adaptive mu needs rho >= 1 and mu_max >= mu, got {a:?}"
                )));
            }
        }
        Ok(())
    }
}

/// ADMM iterates.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub z: DMatrix<f64>,
    pub k: DMatrix<f64>,
    pub j: DMatrix<f64>,
    pub w: DMatrix<f64>,
    pub g: Vec<f64>,
    pub y1: DMatrix<f64>,
    pub y2: DMatrix<f64>,
    pub mu: f64,
    pub iter: usize,
}

impl SolverState {
    /// `|J - Z|_F` and `|W - K|_F`.
    pub fn residuals(&self) -> (f64, f64) {
        ((&self.j - &self.z).norm(), (&self.w - &self.k).norm())
    }

    fn relative_residual(&self) -> f64 {
        let (rz, rk) = self.residuals();
        (rz / self.z.norm().max(1.0)).max(rk / self.k.norm().max(1.0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub res_jz: f64,
    pub res_wk: f64,
    pub lagrangian: f64,
    pub g: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SolverOutput {
    pub z: DMatrix<f64>,
    pub k: DMatrix<f64>,
    pub g: Vec<f64>,
    pub trace: Vec<IterationRecord>,
    pub converged: bool,
    pub iterations: usize,
    /// Iterations whose weight QP hit its cap.
    pub qp_failures: usize,
}

/// `Z = (K + mu I)^{-1} (K + mu J + Y1)`, before clipping. `K` is
/// symmetrized for the factorization.
pub fn update_z(
    k: &DMatrix<f64>,
    j: &DMatrix<f64>,
    y1: &DMatrix<f64>,
    mu: f64,
) -> Result<DMatrix<f64>> {
    let n = k.nrows();
    check_square("update_z K", k, n)?;
    check_square("update_z J", j, n)?;
    check_square("update_z Y1", y1, n)?;
    let ks = symmetrize(k.clone());
    let system = &ks + DMatrix::identity(n, n) * mu;
    let rhs = &ks + j * mu + y1;
    if system.iter().chain(rhs.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("Z-update system".into()));
    }
    if let Some(chol) = system.clone().cholesky() {
        return Ok(chol.solve(&rhs));
    }
    system.lu().solve(&rhs).ok_or(Error::SingularSystem)
}

/// Closed-form K minimizer of the augmented Lagrangian, before clipping and
/// symmetrization:
/// `(2 gamma sum g_i H^i + mu W + Y2 - I/2 + Z^T - Z Z^T / 2) / (mu + 2 gamma)`.
pub fn update_k(
    z: &DMatrix<f64>,
    w: &DMatrix<f64>,
    y2: &DMatrix<f64>,
    g: &[f64],
    bank: &KernelBank,
    mu: f64,
    gamma: f64,
) -> Result<DMatrix<f64>> {
    let n = bank.n();
    check_square("update_k Z", z, n)?;
    check_square("update_k W", w, n)?;
    check_square("update_k Y2", y2, n)?;
    if g.len() != bank.r() {
        return Err(Error::DimensionMismatch {
            context: "update_k weights",
            expected: bank.r(),
            found: g.len(),
        });
    }
    let mut num = bank.combine(g) * (2.0 * gamma) + w * mu + y2 + z.transpose() - z * z.transpose() * 0.5;
    for i in 0..n {
        num[(i, i)] -= 0.5;
    }
    Ok(num / (mu + 2.0 * gamma))
}

/// Prox of `(alpha / mu) rho(.)` at `Z - Y1 / mu`, before clipping.
pub fn update_j(
    z: &DMatrix<f64>,
    y1: &DMatrix<f64>,
    mu: f64,
    alpha: f64,
    regularizer: Regularizer,
) -> Result<DMatrix<f64>> {
    let d = z - y1 / mu;
    let tau = alpha / mu;
    match regularizer {
        Regularizer::Sparse => Ok(soft_threshold(&d, tau)),
        Regularizer::LowRank => svt(&d, tau),
    }
}

/// `svt(K - Y2 / mu, beta / mu)`, before clipping.
pub fn update_w(k: &DMatrix<f64>, y2: &DMatrix<f64>, mu: f64, beta: f64) -> Result<DMatrix<f64>> {
    svt(&(k - y2 / mu), beta / mu)
}

/// `Y1 + mu (J - Z)` and `Y2 + mu (W - K)`.
pub fn update_multipliers(state: &SolverState, mu: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    (
        &state.y1 + (&state.j - &state.z) * mu,
        &state.y2 + (&state.w - &state.k) * mu,
    )
}

/// `1/2 Tr(K - 2KZ + Z^T K Z)`
pub fn self_expression_loss(k: &DMatrix<f64>, z: &DMatrix<f64>) -> f64 {
    0.5 * (k.trace() - 2.0 * (k * z).trace() + (z.transpose() * k * z).trace())
}

fn regularizer_value(m: &DMatrix<f64>, regularizer: Regularizer) -> Result<f64> {
    match regularizer {
        Regularizer::Sparse => Ok(m.iter().map(|v| v.abs()).sum()),
        Regularizer::LowRank => nuclear_norm(m),
    }
}

/// Value of the augmented Lagrangian at `state`, using `state.mu`. In
/// fixed-kernel mode the `beta` and `gamma` terms are omitted.
pub fn lagrangian_value(state: &SolverState, config: &SolverConfig, bank: &KernelBank) -> Result<f64> {
    let mu = state.mu;
    let mut value = self_expression_loss(&state.k, &state.z)
        + config.alpha * regularizer_value(&state.j, config.regularizer)?
        + 0.5 * mu * (&state.j - &state.z + &state.y1 / mu).norm_squared();
    if config.mode == SolverMode::MultiKernel {
        value += config.beta * nuclear_norm(&state.w)?
            + config.gamma * (&state.k - bank.combine(&state.g)).norm_squared()
            + 0.5 * mu * (&state.w - &state.k + &state.y2 / mu).norm_squared();
    }
    Ok(value)
}

/// Value of the unsplit objective at `(Z, K, g)`.
pub fn objective_value(
    z: &DMatrix<f64>,
    k: &DMatrix<f64>,
    g: &[f64],
    config: &SolverConfig,
    bank: &KernelBank,
) -> Result<f64> {
    let mut value = self_expression_loss(k, z) + config.alpha * regularizer_value(z, config.regularizer)?;
    if config.mode == SolverMode::MultiKernel {
        value += config.beta * nuclear_norm(k)? + config.gamma * (k - bank.combine(g)).norm_squared();
    }
    Ok(value)
}

fn check_square(context: &'static str, m: &DMatrix<f64>, n: usize) -> Result<()> {
    if m.nrows() != n {
        return Err(Error::DimensionMismatch {
            context,
            expected: n,
            found: m.nrows(),
        });
    }
    if m.ncols() != n {
        return Err(Error::DimensionMismatch {
            context,
            expected: n,
            found: m.ncols(),
        });
    }
    Ok(())
}

fn check_finite(name: &str, m: &DMatrix<f64>) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(name.to_string()))
    }
}

/// A solver run. Owns its iterates and borrows the bank read-only.
#[derive(Debug, Clone)]
pub struct Solver<'a> {
    bank: &'a KernelBank,
    config: SolverConfig,
    state: SolverState,
    gram: DMatrix<f64>,
    qp_failures: usize,
}

impl<'a> Solver<'a> {
    /// Initializes `g = 1/r`, `K = W = sum_i g_i H^i`, `Y1 = Y2 = 0` and
    /// `J` with i.i.d. uniform `[0, c)` entries drawn from `config.seed`,
    /// where `c` is `config.j_init_scale` or `1/n`.
    pub fn new(bank: &'a KernelBank, config: SolverConfig) -> Result<Self> {
        config.validate()?;
        let r = bank.r();
        if config.mode == SolverMode::FixedKernel && r != 1 {
            return Err(Error::InvalidConfig(format!(
                "fixed-kernel mode needs a single-kernel bank, got r = {r}"
            )));
        }
        let n = bank.n();
        let g = vec![1.0 / r as f64; r];
        let k = bank.combine(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let c = config.j_init_scale.unwrap_or(1.0 / n as f64);
        let j = DMatrix::from_fn(n, n, |_, _| c * rng.random::<f64>());
        let state = SolverState {
            z: DMatrix::zeros(n, n),
            w: k.clone(),
            k,
            j,
            g,
            y1: DMatrix::zeros(n, n),
            y2: DMatrix::zeros(n, n),
            mu: config.mu,
            iter: 0,
        };
        let gram = match config.mode {
            SolverMode::MultiKernel => trace_gram(bank),
            SolverMode::FixedKernel => DMatrix::zeros(0, 0),
        };
        Ok(Self {
            bank,
            config,
            state,
            gram,
            qp_failures: 0,
        })
    }

    pub fn state(&self) -> &SolverState {
        &self.state
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    /// Relative primal residual used by the stopping rule.
    pub fn is_converged(&self) -> bool {
        self.state.relative_residual() <= self.config.tol
    }

    /// One full iteration.
    pub fn step(&mut self) -> Result<IterationRecord> {
        let cfg = &self.config;
        let bank = self.bank;
        let s = &mut self.state;
        let mu = s.mu;
        let multi = cfg.mode == SolverMode::MultiKernel;

        s.z = update_z(&s.k, &s.j, &s.y1, mu)?;
        clip_nonneg_in_place(&mut s.z);
        check_finite("Z", &s.z)?;

        if multi {
            let k = update_k(&s.z, &s.w, &s.y2, &s.g, bank, mu, cfg.gamma)?;
            s.k = symmetrize(k);
            clip_nonneg_in_place(&mut s.k);
            check_finite("K", &s.k)?;
        }

        s.j = update_j(&s.z, &s.y1, mu, cfg.alpha, cfg.regularizer)?;
        clip_nonneg_in_place(&mut s.j);

        if multi {
            s.w = update_w(&s.k, &s.y2, mu, cfg.beta)?;
            clip_nonneg_in_place(&mut s.w);

            let qp = WeightQp {
                m: self.gram.clone(),
                a: linear_term(bank, &s.k, cfg.gamma, cfg.linear_term)?,
                gamma: cfg.gamma,
            };
            let sol = solve_simplex_qp(&qp, &s.g);
            if !sol.converged {
                self.qp_failures += 1;
                log::debug!("iteration {}: weight QP hit its iteration cap", s.iter + 1);
            }
            s.g = sol.g;
        }

        let (y1, y2) = update_multipliers(s, mu);
        s.y1 = y1;
        if multi {
            s.y2 = y2;
        }
        check_finite("Y1", &s.y1)?;
        check_finite("Y2", &s.y2)?;

        s.iter += 1;
        let lagrangian = lagrangian_value(s, cfg, bank)?;
        if let Some(a) = cfg.adaptive_mu {
            s.mu = (a.rho * s.mu).min(a.mu_max);
        }
        let (res_jz, res_wk) = s.residuals();
        Ok(IterationRecord {
            iter: s.iter,
            res_jz,
            res_wk,
            lagrangian,
            g: s.g.clone(),
        })
    }

    /// Iterates until the stopping rule holds or `max_iter` is reached,
    /// calling `observe` after every iteration.
    pub fn run_with<F>(mut self, mut observe: F) -> Result<SolverOutput>
    where
        F: FnMut(&SolverState, &IterationRecord),
    {
        let mut trace = Vec::with_capacity(self.config.max_iter);
        let mut converged = false;
        while self.state.iter < self.config.max_iter {
            let record = self.step()?;
            observe(&self.state, &record);
            trace.push(record);
            if self.is_converged() {
                converged = true;
                break;
            }
        }
        let iterations = self.state.iter;
        let SolverState { z, k, g, .. } = self.state;
        Ok(SolverOutput {
            z,
            k,
            g,
            trace,
            converged,
            iterations,
            qp_failures: self.qp_failures,
        })
    }

    pub fn run(self) -> Result<SolverOutput> {
        self.run_with(|_, _| {})
    }
}

/// Runs the solver to completion.
pub fn solve(bank: &KernelBank, config: &SolverConfig) -> Result<SolverOutput> {
    Solver::new(bank, config.clone())?.run()
}

/// Writes `iter,res_JZ,res_WK,lagrangian,g_1..g_r` rows.
pub fn write_trace_csv<W: Write>(out: W, trace: &[IterationRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let r = trace.first().map_or(0, |t| t.g.len());
    let mut header = vec![
        "iter".to_string(),
        "res_JZ".into(),
        "res_WK".into(),
        "lagrangian".into(),
    ];
    header.extend((1..=r).map(|i| format!("g_{i}")));
    w.write_record(&header)?;
    for rec in trace {
        let mut row = vec![
            rec.iter.to_string(),
            rec.res_jz.to_string(),
            rec.res_wk.to_string(),
            rec.lagrangian.to_string(),
        ];
        row.extend(rec.g.iter().map(f64::to_string));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trace_file(path: &Path, trace: &[IterationRecord]) -> Result<()> {
    write_trace_csv(std::fs::File::create(path)?, trace)
}
