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

//! Base kernel construction and normalization.
//!
//! A [`KernelBank`] holds `r` symmetric `n x n` kernels, each rescaled so its
//! largest entry is exactly 1 and no entry is negative. The standard recipe
//! is seven gaussian bandwidths, one linear kernel and four polynomial
//! kernels, in that order.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Gaussian bandwidth multipliers of the standard recipe.
pub const STANDARD_GAUSSIAN_T: [f64; 7] = [0.01, 0.05, 0.1, 1.0, 10.0, 50.0, 100.0];

/// Data matrix with one sample per column (`m` features x `n` samples).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    values: DMatrix<f64>,
}

impl FeatureMatrix {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() < 1 {
            return Err(Error::InvalidInput("feature matrix needs at least one feature".into()));
        }
        if values.ncols() < 2 {
            return Err(Error::InvalidInput(format!(
                "feature matrix needs at least two samples, got {}",
                values.ncols()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("feature matrix".into()));
        }
        Ok(Self { values })
    }

    /// Builds the matrix from row-per-sample data, transposing into the
    /// column-sample layout.
    pub fn from_samples(samples: &[Vec<f64>]) -> Result<Self> {
        let n = samples.len();
        let m = samples.first().map_or(0, Vec::len);
        for (i, s) in samples.iter().enumerate() {
            if s.len() != m {
                return Err(Error::RaggedRows {
                    line: i + 1,
                    expected: m,
                    found: s.len(),
                });
            }
        }
        Self::new(DMatrix::from_fn(m, n, |f, s| samples[s][f]))
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn n_samples(&self) -> usize {
        self.values.ncols()
    }

    pub fn n_features(&self) -> usize {
        self.values.nrows()
    }

    /// Standardizes every feature to zero mean and unit variance. Constant
    /// features are centered only.
    pub fn standardized(&self) -> FeatureMatrix {
        let n = self.n_samples() as f64;
        let mut values = self.values.clone();
        for mut row in values.row_iter_mut() {
            let mean = row.sum() / n;
            let var = row.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            let sd = var.sqrt();
            for v in row.iter_mut() {
                *v -= mean;
                if sd > 0.0 {
                    *v /= sd;
                }
            }
        }
        FeatureMatrix { values }
    }

    /// SHA-256 over the shape and the little-endian bytes of every entry.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update((self.n_features() as u64).to_le_bytes());
        hasher.update((self.n_samples() as u64).to_le_bytes());
        for v in self.values.iter() {
            hasher.update(v.to_le_bytes());
        }
        hex::encode(hasher.finalize())
    }

    fn squared_distances(&self) -> DMatrix<f64> {
        let n = self.n_samples();
        let mut d = DMatrix::zeros(n, n);
        for j in 0..n {
            let xj = self.values.column(j);
            for i in (j + 1)..n {
                let dist = self
                    .values
                    .column(i)
                    .iter()
                    .zip(xj.iter())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>();
                d[(i, j)] = dist;
                d[(j, i)] = dist;
            }
        }
        d
    }
}

/// How a base kernel is computed from the feature matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    /// `exp(-|x - y|^2 / (t * d_max^2))`, with `d_max` the largest pairwise
    /// distance in the dataset.
    Gaussian { t: f64 },
    /// `x^T y`
    Linear,
    /// `(a + x^T y)^b`
    Polynomial { a: f64, b: u32 },
    /// A user-supplied matrix that was not built from features here.
    Precomputed { name: String },
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            KernelSpec::Gaussian { t } if !(t.is_finite() && *t > 0.0) => Err(
                Error::InvalidConfig(format!("gaussian kernel needs t > 0, got {t}")),
            ),
            KernelSpec::Polynomial { a, b } if *b < 1 || !a.is_finite() => Err(
                Error::InvalidConfig(format!("polynomial kernel needs b >= 1, got a={a}, b={b}")),
            ),
            _ => Ok(()),
        }
    }

    /// The twelve-kernel recipe: gaussians, linear, then polynomials over
    /// `a in {0, 1}` and `b in {2, 4}`.
    pub fn standard_recipe() -> Vec<KernelSpec> {
        let mut specs: Vec<KernelSpec> = STANDARD_GAUSSIAN_T
            .iter()
            .map(|&t| KernelSpec::Gaussian { t })
            .collect();
        specs.push(KernelSpec::Linear);
        for a in [0.0, 1.0] {
            for b in [2, 4] {
                specs.push(KernelSpec::Polynomial { a, b });
            }
        }
        specs
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelSpec::Gaussian { t } => write!(f, "gaussian(t={t})"),
            KernelSpec::Linear => f.write_str("linear"),
            KernelSpec::Polynomial { a, b } => write!(f, "polynomial(a={a},b={b})"),
            KernelSpec::Precomputed { name } => write!(f, "precomputed({name})"),
        }
    }
}

/// Parses `gaussian:T`, `linear` or `poly:A:B`.
impl FromStr for KernelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| Error::InvalidConfig(format!("bad number `{v}` in kernel spec `{s}`")))
        };
        let spec = match parts.as_slice() {
            ["gaussian", t] => KernelSpec::Gaussian { t: num(t)? },
            ["linear"] => KernelSpec::Linear,
            ["poly" | "polynomial", a, b] => KernelSpec::Polynomial {
                a: num(a)?,
                b: b.parse()
                    .map_err(|_| Error::InvalidConfig(format!("bad degree `{b}` in kernel spec `{s}`")))?,
            },
            _ => {
                return Err(Error::InvalidConfig(format!(
                    "unknown kernel spec `{s}`; expected gaussian:T, linear or poly:A:B"
                )))
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// A symmetric `n x n` kernel together with the recipe that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    values: DMatrix<f64>,
    spec: KernelSpec,
    normalized: bool,
}

impl KernelMatrix {
    /// Wraps a raw symmetric matrix. Symmetry is enforced by averaging with
    /// the transpose.
    pub fn new(values: DMatrix<f64>, spec: KernelSpec) -> Result<Self> {
        if !values.is_square() {
            return Err(Error::DimensionMismatch {
                context: "kernel matrix columns",
                expected: values.nrows(),
                found: values.ncols(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("kernel {spec}")));
        }
        Ok(Self {
            values: symmetrize(values),
            spec,
            normalized: false,
        })
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn into_values(self) -> DMatrix<f64> {
        self.values
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn max_entry(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Record of negative entries zeroed during normalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClipRecord {
    pub spec: KernelSpec,
    pub clipped_entries: usize,
    pub most_negative: f64,
}

/// Ordered collection of normalized base kernels sharing one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelBank {
    kernels: Vec<KernelMatrix>,
    clip_log: Vec<ClipRecord>,
}

impl KernelBank {
    pub fn new(kernels: Vec<KernelMatrix>) -> Result<Self> {
        let first = kernels
            .first()
            .ok_or_else(|| Error::InvalidInput("kernel bank needs at least one kernel".into()))?;
        let n = first.n();
        for k in &kernels {
            if k.n() != n {
                return Err(Error::DimensionMismatch {
                    context: "kernel bank member size",
                    expected: n,
                    found: k.n(),
                });
            }
            if !k.normalized {
                return Err(Error::InvalidInput(format!(
                    "kernel {} is not normalized",
                    k.spec
                )));
            }
        }
        Ok(Self {
            kernels,
            clip_log: Vec::new(),
        })
    }

    /// Normalizes each raw matrix and collects them into a bank.
    pub fn from_raw(kernels: Vec<KernelMatrix>) -> Result<Self> {
        let mut clip_log = Vec::new();
        let mut normalized = Vec::with_capacity(kernels.len());
        for k in &kernels {
            let (k, clip) = normalize_with_record(k)?;
            clip_log.extend(clip);
            normalized.push(k);
        }
        let mut bank = Self::new(normalized)?;
        bank.clip_log = clip_log;
        Ok(bank)
    }

    pub fn kernels(&self) -> &[KernelMatrix] {
        &self.kernels
    }

    pub fn get(&self, i: usize) -> Option<&KernelMatrix> {
        self.kernels.get(i)
    }

    pub fn r(&self) -> usize {
        self.kernels.len()
    }

    pub fn n(&self) -> usize {
        self.kernels[0].n()
    }

    pub fn specs(&self) -> Vec<KernelSpec> {
        self.kernels.iter().map(|k| k.spec.clone()).collect()
    }

    /// Negative entries that were clipped while normalizing members.
    pub fn clip_log(&self) -> &[ClipRecord] {
        &self.clip_log
    }

    /// `sum_i weights[i] * H^i`
    pub fn combine(&self, weights: &[f64]) -> DMatrix<f64> {
        let n = self.n();
        let mut out = DMatrix::zeros(n, n);
        for (k, &w) in self.kernels.iter().zip(weights) {
            out += &k.values * w;
        }
        out
    }
}

/// Evaluates one kernel on every pair of samples. The result is not
/// normalized.
pub fn build_kernel(x: &FeatureMatrix, spec: &KernelSpec) -> Result<KernelMatrix> {
    spec.validate()?;
    match spec {
        KernelSpec::Gaussian { .. } => {
            let d2 = x.squared_distances();
            let d2_max = d2.max();
            gaussian_from_distances(&d2, d2_max, spec)
        }
        _ => inner_product_kernel(x, spec),
    }
}

fn gaussian_from_distances(
    d2: &DMatrix<f64>,
    d2_max: f64,
    spec: &KernelSpec,
) -> Result<KernelMatrix> {
    let KernelSpec::Gaussian { t } = spec else {
        unreachable!("caller passes gaussian specs only")
    };
    if d2_max <= 0.0 {
        return Err(Error::DegenerateData);
    }
    let scale = t * d2_max;
    KernelMatrix::new(d2.map(|d| (-d / scale).exp()), spec.clone())
}

fn inner_product_kernel(x: &FeatureMatrix, spec: &KernelSpec) -> Result<KernelMatrix> {
    let gram = x.values.tr_mul(&x.values);
    let values = match spec {
        KernelSpec::Linear => gram,
        KernelSpec::Polynomial { a, b } => {
            let b = i32::try_from(*b)
                .map_err(|_| Error::InvalidConfig(format!("polynomial degree {b} too large")))?;
            gram.map(|g| (a + g).powi(b))
        }
        KernelSpec::Precomputed { name } => {
            return Err(Error::InvalidConfig(format!(
                "precomputed kernel `{name}` cannot be built from features"
            )))
        }
        KernelSpec::Gaussian { .. } => unreachable!(),
    };
    KernelMatrix::new(values, spec.clone())
}

/// Divides every entry by the largest one. Entries still negative after
/// scaling are set to zero and reported through `log::warn!`.
pub fn normalize_kernel(h: &KernelMatrix) -> Result<KernelMatrix> {
    normalize_with_record(h).map(|(k, _)| k)
}

fn normalize_with_record(h: &KernelMatrix) -> Result<(KernelMatrix, Option<ClipRecord>)> {
    let max = h.max_entry();
    if !(max > 0.0) {
        return Err(Error::NonPositiveKernel { max });
    }
    let mut values = h.values.map(|v| v / max);
    let mut clipped = 0usize;
    let mut most_negative = 0.0f64;
    for v in values.iter_mut() {
        if *v < 0.0 {
            clipped += 1;
            most_negative = most_negative.min(*v);
            *v = 0.0;
        }
    }
    let record = (clipped > 0).then(|| {
        log::warn!(
            "kernel {}: clipped {clipped} negative entries (min {most_negative:.3e}) after normalization",
            h.spec
        );
        ClipRecord {
            spec: h.spec.clone(),
            clipped_entries: clipped,
            most_negative,
        }
    });
    let kernel = KernelMatrix {
        values,
        spec: h.spec.clone(),
        normalized: true,
    };
    Ok((kernel, record))
}

/// Builds and normalizes one kernel per spec. Gaussian members share a
/// single maximal pairwise distance.
pub fn build_bank(x: &FeatureMatrix, specs: &[KernelSpec]) -> Result<KernelBank> {
    for s in specs {
        s.validate()?;
    }
    let needs_distances = specs
        .iter()
        .any(|s| matches!(s, KernelSpec::Gaussian { .. }));
    let d2 = needs_distances.then(|| x.squared_distances());
    let d2_max = d2.as_ref().map_or(0.0, |d| d.max());

    let raw: Vec<KernelMatrix> = specs
        .par_iter()
        .map(|spec| match (spec, &d2) {
            (KernelSpec::Gaussian { .. }, Some(d2)) => gaussian_from_distances(d2, d2_max, spec),
            _ => inner_product_kernel(x, spec),
        })
        .collect::<Result<_>>()?;
    KernelBank::from_raw(raw)
}

/// The twelve-kernel bank.
pub fn build_standard_bank(x: &FeatureMatrix) -> Result<KernelBank> {
    build_bank(x, &KernelSpec::standard_recipe())
}

pub(crate) fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    let t = m.transpose();
    (m + t) * 0.5
}
