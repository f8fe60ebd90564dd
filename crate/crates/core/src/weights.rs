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

//! Kernel weight subproblem: minimize `gamma * g^T M g - a^T g` over the
//! probability simplex.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel_bank::KernelBank;
use crate::prox::project_simplex;

pub const QP_MAX_ITER: usize = 10_000;

/// Constant in front of `Tr(K H^i)` in the linear term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinearTermConvention {
    /// `a_i = 2 gamma Tr(K H^i)`, from expanding `gamma |K - sum g_i H^i|_F^2`.
    #[default]
    Expanded,
    /// `a_i = gamma / 2 * Tr(K H^i)`, the constant as originally printed.
    HalfGamma,
}

impl LinearTermConvention {
    fn factor(self, gamma: f64) -> f64 {
        match self {
            LinearTermConvention::Expanded => 2.0 * gamma,
            LinearTermConvention::HalfGamma => 0.5 * gamma,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightQp {
    /// `M_ij = Tr(H^i H^j)`
    pub m: DMatrix<f64>,
    pub a: DVector<f64>,
    pub gamma: f64,
}

impl WeightQp {
    pub fn objective(&self, g: &DVector<f64>) -> f64 {
        self.gamma * g.dot(&(&self.m * g)) - self.a.dot(g)
    }

    pub fn gradient(&self, g: &DVector<f64>) -> DVector<f64> {
        &self.m * g * (2.0 * self.gamma) - &self.a
    }

    pub fn r(&self) -> usize {
        self.a.len()
    }
}

/// `Tr(H^i H^j)` for every pair of bank members.
pub fn trace_gram(bank: &KernelBank) -> DMatrix<f64> {
    let r = bank.r();
    let mut m = DMatrix::zeros(r, r);
    for i in 0..r {
        for j in i..r {
            // Members are exactly symmetric, so Tr(AB) is the Frobenius product.
            let v = bank.kernels()[i].values().dot(bank.kernels()[j].values());
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

pub fn linear_term(
    bank: &KernelBank,
    k: &DMatrix<f64>,
    gamma: f64,
    convention: LinearTermConvention,
) -> Result<DVector<f64>> {
    if k.nrows() != bank.n() || k.ncols() != bank.n() {
        return Err(Error::DimensionMismatch {
            context: "consensus kernel vs bank",
            expected: bank.n(),
            found: if k.nrows() != bank.n() { k.nrows() } else { k.ncols() },
        });
    }
    let c = convention.factor(gamma);
    Ok(DVector::from_iterator(
        bank.r(),
        bank.kernels().iter().map(|h| {
            // Tr(K H) with H symmetric.
            c * k.dot(h.values())
        }),
    ))
}

pub fn build_qp_coefficients(
    bank: &KernelBank,
    k: &DMatrix<f64>,
    gamma: f64,
    convention: LinearTermConvention,
) -> Result<WeightQp> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidConfig(format!("gamma must be positive, got {gamma}")));
    }
    Ok(WeightQp {
        m: trace_gram(bank),
        a: linear_term(bank, k, gamma, convention)?,
        gamma,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpSolution {
    pub g: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    /// False when the iteration cap was hit before the stationarity test
    /// passed; `g` is then the best iterate seen.
    pub converged: bool,
}

/// Monotone accelerated projected gradient with step `1 / L`,
/// `L = 2 gamma lambda_max(M)`, followed by an exact solve on the detected
/// support.
pub fn solve_simplex_qp(qp: &WeightQp, g0: &[f64]) -> QpSolution {
    let r = qp.r();
    assert_eq!(g0.len(), r, "warm start length must match the QP size");
    let mut x = DVector::from_vec(project_simplex(g0));
    if r == 1 {
        let objective = qp.objective(&x);
        return QpSolution {
            g: vec![1.0],
            objective,
            iterations: 0,
            converged: true,
        };
    }

    let lipschitz = 2.0 * qp.gamma * spectral_radius(&qp.m);
    let scale = qp.a.amax().max(2.0 * qp.gamma * qp.m.amax()).max(f64::MIN_POSITIVE);
    if !(lipschitz > 1e-14 * scale) {
        return linear_vertex(qp, x);
    }
    let step = 1.0 / lipschitz;
    let stationarity_tol = 1e-13;

    let project = |v: &DVector<f64>| DVector::from_vec(project_simplex(v.as_slice()));
    let mut fx = qp.objective(&x);
    let mut y = x.clone();
    let mut t = 1.0f64;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < QP_MAX_ITER {
        iterations += 1;
        let z = project(&(&y - qp.gradient(&y) * step));
        let fz = qp.objective(&z);
        let x_prev = x.clone();
        if fz <= fx {
            x = z.clone();
            fx = fz;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        y = &x + (&z - &x) * (t / t_next) + (&x - &x_prev) * ((t - 1.0) / t_next);
        t = t_next;

        let mapped = project(&(&x - qp.gradient(&x) * step));
        if (&mapped - &x).amax() <= stationarity_tol {
            converged = true;
            break;
        }
    }

    if let Some((polished, fp)) = polish_on_support(qp, &x) {
        if fp <= fx {
            x = polished;
            fx = fp;
            converged = true;
        }
    }

    QpSolution {
        g: project_simplex(x.as_slice()),
        objective: fx,
        iterations,
        converged,
    }
}

fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::try_new(m.clone(), f64::EPSILON, 10_000)
        .map(|e| e.eigenvalues.amax())
        .unwrap_or_else(|| m.row_iter().map(|r| r.abs().sum()).fold(0.0, f64::max))
}

/// Minimizer when the quadratic term vanishes: all weight on the largest
/// `a_i`, or the warm start if `a` is flat.
fn linear_vertex(qp: &WeightQp, x: DVector<f64>) -> QpSolution {
    let best = qp.a.max();
    let winners: Vec<usize> = (0..qp.r()).filter(|&i| qp.a[i] == best).collect();
    let g = if winners.len() == qp.r() {
        x
    } else {
        let mut g = DVector::zeros(qp.r());
        g[winners[0]] = 1.0;
        g
    };
    QpSolution {
        objective: qp.objective(&g),
        g: g.as_slice().to_vec(),
        iterations: 0,
        converged: true,
    }
}

/// Solves the equality-constrained problem on the support of `x` and keeps it
/// only if it is feasible and satisfies the multiplier sign conditions.
fn polish_on_support(qp: &WeightQp, x: &DVector<f64>) -> Option<(DVector<f64>, f64)> {
    let support: Vec<usize> = (0..qp.r()).filter(|&i| x[i] > 0.0).collect();
    let s = support.len();
    if s == 0 {
        return None;
    }
    // [2 gamma M_SS  -1] [g_S   ]   [a_S]
    // [ 1^T           0] [lambda] = [ 1 ]
    let mut kkt = DMatrix::zeros(s + 1, s + 1);
    let mut rhs = DVector::zeros(s + 1);
    for (p, &i) in support.iter().enumerate() {
        for (q, &j) in support.iter().enumerate() {
            kkt[(p, q)] = 2.0 * qp.gamma * qp.m[(i, j)];
        }
        kkt[(p, s)] = -1.0;
        kkt[(s, p)] = 1.0;
        rhs[p] = qp.a[i];
    }
    rhs[s] = 1.0;
    let sol = kkt.lu().solve(&rhs)?;
    if sol.iter().any(|v| !v.is_finite()) || (0..s).any(|p| sol[p] < 0.0) {
        return None;
    }
    let mut g = DVector::zeros(qp.r());
    for (p, &i) in support.iter().enumerate() {
        g[i] = sol[p];
    }
    let g = DVector::from_vec(project_simplex(g.as_slice()));
    let lambda = sol[s];
    let grad = qp.gradient(&g);
    let tol = 1e-9 * (1.0 + lambda.abs() + grad.amax());
    if (0..qp.r()).any(|i| g[i] == 0.0 && grad[i] < lambda - tol) {
        return None;
    }
    let f = qp.objective(&g);
    Some((g, f))
}
