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

//! Proximal and projection operators used by the ADMM updates.

use nalgebra::{DMatrix, SVD};

use crate::error::{Error, Result};

const SVD_MAX_ITER: usize = 10_000;

/// Scalar shrinkage `sign(x) * max(|x| - tau, 0)`.
#[inline]
pub fn shrink(x: f64, tau: f64) -> f64 {
    if x > tau {
        x - tau
    } else if x < -tau {
        x + tau
    } else {
        0.0
    }
}

/// Elementwise soft-thresholding: the prox of `tau * |.|_1`.
pub fn soft_threshold(d: &DMatrix<f64>, tau: f64) -> DMatrix<f64> {
    debug_assert!(tau >= 0.0);
    d.map(|v| shrink(v, tau))
}

/// An SVD whose singular values have been shrunk by `threshold`.
#[derive(Debug, Clone)]
pub struct ThresholdedSvd {
    pub u: DMatrix<f64>,
    /// Original singular values, nonincreasing.
    pub sigma: Vec<f64>,
    pub v_t: DMatrix<f64>,
    pub threshold: f64,
}

impl ThresholdedSvd {
    pub fn new(g: &DMatrix<f64>, threshold: f64) -> Result<Self> {
        let (u, sigma, v_t) = sorted_svd(g)?;
        Ok(Self {
            u,
            sigma,
            v_t,
            threshold,
        })
    }

    pub fn shrunk_values(&self) -> Vec<f64> {
        self.sigma
            .iter()
            .map(|s| (s - self.threshold).max(0.0))
            .collect()
    }

    /// `U diag(max(sigma - threshold, 0)) V^T`, skipping zeroed components.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.u.nrows(), self.v_t.ncols());
        for (k, s) in self.shrunk_values().into_iter().enumerate() {
            if s <= 0.0 {
                break;
            }
            out.ger(s, &self.u.column(k), &self.v_t.row(k).transpose(), 1.0);
        }
        out
    }
}

/// Full SVD with singular values in nonincreasing order.
pub fn sorted_svd(g: &DMatrix<f64>) -> Result<(DMatrix<f64>, Vec<f64>, DMatrix<f64>)> {
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("svd input".into()));
    }
    let svd = SVD::try_new(g.clone(), true, true, f64::EPSILON, SVD_MAX_ITER)
        .ok_or(Error::SvdFailure)?;
    let (Some(u), Some(v_t)) = (svd.u, svd.v_t) else {
        return Err(Error::SvdFailure);
    };
    let sigma: Vec<f64> = svd.singular_values.iter().copied().collect();
    Ok((u, sigma, v_t))
}

/// Singular value thresholding: the prox of `tau * |.|_*`.
pub fn svt(g: &DMatrix<f64>, tau: f64) -> Result<DMatrix<f64>> {
    debug_assert!(tau >= 0.0);
    Ok(ThresholdedSvd::new(g, tau)?.reconstruct())
}

/// Sum of singular values.
pub fn nuclear_norm(m: &DMatrix<f64>) -> Result<f64> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("nuclear norm input".into()));
    }
    let svd = SVD::try_new(m.clone(), false, false, f64::EPSILON, SVD_MAX_ITER)
        .ok_or(Error::SvdFailure)?;
    Ok(svd.singular_values.sum())
}

/// Elementwise `max(m, 0)`.
pub fn project_nonneg(m: &DMatrix<f64>) -> DMatrix<f64> {
    m.map(|v| v.max(0.0))
}

pub fn clip_nonneg_in_place(m: &mut DMatrix<f64>) {
    m.apply(|v| *v = v.max(0.0));
}

/// Euclidean projection onto `{g : g >= 0, sum g = 1}` by the sort-and-
/// threshold method.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    assert!(!v.is_empty(), "simplex projection of an empty vector");
    let total: f64 = v.iter().sum();
    if v.iter().all(|&x| x >= 0.0) && (total - 1.0).abs() <= 4.0 * v.len() as f64 * f64::EPSILON {
        let mut out = v.to_vec();
        fix_sum(&mut out);
        return out;
    }
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cumsum += uj;
        let t = (cumsum - 1.0) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    let mut out: Vec<f64> = v.iter().map(|x| (x - theta).max(0.0)).collect();
    fix_sum(&mut out);
    out
}

/// Moves the rounding error of the sum onto the largest entry.
fn fix_sum(out: &mut [f64]) {
    let s: f64 = out.iter().sum();
    if s > 0.0 && s != 1.0 {
        let imax = (0..out.len())
            .max_by(|&a, &b| out[a].total_cmp(&out[b]))
            .unwrap_or(0);
        out[imax] += 1.0 - s;
    }
}
