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

//! Clustering evaluation against ground-truth labels.
//!
//! Accuracy uses the one-to-one cluster-to-class assignment that maximizes
//! the number of matched samples (Kuhn-Munkres). NMI divides mutual
//! information by the larger of the two marginal entropies. Precision,
//! recall, F-score and ARI count sample pairs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Labels renumbered to `0..c` in ascending order of the original values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelVector {
    labels: Vec<usize>,
    n_classes: usize,
}

impl LabelVector {
    pub fn canonicalize<T: Ord + Clone>(raw: &[T]) -> (Self, Vec<T>) {
        let mut index: BTreeMap<T, usize> = raw.iter().cloned().map(|v| (v, 0)).collect();
        for (i, v) in index.values_mut().enumerate() {
            *v = i;
        }
        let labels = raw.iter().map(|v| index[v]).collect();
        let originals = index.into_keys().collect::<Vec<_>>();
        (
            Self {
                labels,
                n_classes: originals.len(),
            },
            originals,
        )
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Joint counts with true classes on rows and predicted clusters on columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    pub counts: Vec<Vec<usize>>,
    pub n: usize,
    /// Original label value of each row.
    pub classes: Vec<usize>,
    /// Original label value of each column.
    pub clusters: Vec<usize>,
}

impl ContingencyTable {
    pub fn new(truth: &[usize], pred: &[usize]) -> Result<Self> {
        if truth.len() != pred.len() {
            return Err(Error::LengthMismatch {
                truth: truth.len(),
                pred: pred.len(),
            });
        }
        if truth.is_empty() {
            return Err(Error::InvalidInput("label vectors are empty".into()));
        }
        let (t, classes) = LabelVector::canonicalize(truth);
        let (p, clusters) = LabelVector::canonicalize(pred);
        let mut counts = vec![vec![0usize; p.n_classes()]; t.n_classes()];
        for (&a, &b) in t.labels().iter().zip(p.labels()) {
            counts[a][b] += 1;
        }
        Ok(Self {
            counts,
            n: truth.len(),
            classes,
            clusters,
        })
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        (0..self.clusters.len())
            .map(|j| self.counts.iter().map(|r| r[j]).sum())
            .collect()
    }
}

/// Maximum-weight perfect matching on a square matrix, returning the column
/// assigned to each row. Hungarian method with potentials, `O(s^3)`.
fn max_weight_assignment(weights: &[Vec<i64>]) -> Vec<usize> {
    let s = weights.len();
    let top = weights.iter().flatten().copied().max().unwrap_or(0);
    let cost = |i: usize, j: usize| top - weights[i][j];
    // 1-based arrays; index 0 is a sentinel.
    let mut u = vec![0i64; s + 1];
    let mut v = vec![0i64; s + 1];
    let mut owner = vec![0usize; s + 1];
    let mut way = vec![0usize; s + 1];
    for row in 1..=s {
        owner[0] = row;
        let mut j0 = 0;
        let mut minv = vec![i64::MAX; s + 1];
        let mut used = vec![false; s + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = i64::MAX;
            let mut j1 = 0;
            for j in 1..=s {
                if !used[j] {
                    let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=s {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0usize; s];
    for j in 1..=s {
        if owner[j] > 0 {
            assignment[owner[j] - 1] = j - 1;
        }
    }
    assignment
}

/// Optimal one-to-one cluster-to-class assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMapping {
    /// `(predicted cluster, true class)` pairs in original label values.
    /// Clusters left over when there are more clusters than classes are
    /// absent.
    pub pairs: Vec<(usize, usize)>,
    pub matched: usize,
}

impl LabelMapping {
    pub fn map(&self, cluster: usize) -> Option<usize> {
        self.pairs.iter().find(|(c, _)| *c == cluster).map(|&(_, t)| t)
    }
}

pub fn optimal_mapping(truth: &[usize], pred: &[usize]) -> Result<LabelMapping> {
    let table = ContingencyTable::new(truth, pred)?;
    Ok(mapping_from_table(&table))
}

fn mapping_from_table(table: &ContingencyTable) -> LabelMapping {
    let (rows, cols) = (table.clusters.len(), table.classes.len());
    let s = rows.max(cols);
    // Zero-padded benefit matrix: clusters on rows, classes on columns.
    let weights: Vec<Vec<i64>> = (0..s)
        .map(|i| {
            (0..s)
                .map(|j| {
                    if i < rows && j < cols {
                        table.counts[j][i] as i64
                    } else {
                        0
                    }
                })
                .collect()
        })
        .collect();
    let assignment = max_weight_assignment(&weights);
    let mut pairs = Vec::new();
    let mut matched = 0;
    for (i, &j) in assignment.iter().enumerate() {
        if i < rows && j < cols {
            pairs.push((table.clusters[i], table.classes[j]));
            matched += table.counts[j][i];
        }
    }
    LabelMapping { pairs, matched }
}

pub fn accuracy(truth: &[usize], pred: &[usize]) -> Result<f64> {
    let table = ContingencyTable::new(truth, pred)?;
    Ok(mapping_from_table(&table).matched as f64 / table.n as f64)
}

fn entropy_of(sizes: &[usize], n: usize) -> f64 {
    let n = n as f64;
    -sizes
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            p * p.ln()
        })
        .sum::<f64>()
}

fn mutual_information(table: &ContingencyTable) -> f64 {
    let a = table.class_sizes();
    let b = table.cluster_sizes();
    let n = table.n as f64;
    let mut terms = Vec::new();
    for (i, row) in table.counts.iter().enumerate() {
        for (j, &nij) in row.iter().enumerate() {
            if nij > 0 {
                let nij = nij as f64;
                terms.push(nij / n * (n * nij / (a[i] as f64 * b[j] as f64)).ln());
            }
        }
    }
    // Summation order fixed by value so that swapping the arguments gives
    // bit-identical results.
    terms.sort_by(f64::total_cmp);
    terms.iter().sum()
}

fn nmi_from_table(table: &ContingencyTable) -> f64 {
    let h_true = entropy_of(&table.class_sizes(), table.n);
    let h_pred = entropy_of(&table.cluster_sizes(), table.n);
    let denom = h_true.max(h_pred);
    if denom <= 0.0 {
        // Both partitions are a single block, hence identical.
        return 1.0;
    }
    (mutual_information(table) / denom).clamp(0.0, 1.0)
}

pub fn nmi(truth: &[usize], pred: &[usize]) -> Result<f64> {
    Ok(nmi_from_table(&ContingencyTable::new(truth, pred)?))
}

fn pairs(c: usize) -> f64 {
    let c = c as f64;
    c * (c - 1.0) / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtendedMetrics {
    pub f_score: f64,
    pub precision: f64,
    pub recall: f64,
    pub ari: f64,
    pub purity: f64,
    /// Size-weighted class entropy within clusters, divided by
    /// `log2(number of classes)`. Lower is better.
    pub entropy: f64,
    /// The same quantity in bits, without normalization.
    pub entropy_raw: f64,
}

fn extended_from_table(table: &ContingencyTable) -> ExtendedMetrics {
    let n = table.n;
    let a = table.class_sizes();
    let b = table.cluster_sizes();
    let together: f64 = table.counts.iter().flatten().map(|&c| pairs(c)).sum();
    let same_class: f64 = a.iter().map(|&c| pairs(c)).sum();
    let same_cluster: f64 = b.iter().map(|&c| pairs(c)).sum();

    // No pairs in the denominator means no possible errors of that kind.
    let precision = if same_cluster > 0.0 { together / same_cluster } else { 1.0 };
    let recall = if same_class > 0.0 { together / same_class } else { 1.0 };
    let f_score = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };

    let total = pairs(n);
    let expected = if total > 0.0 { same_class * same_cluster / total } else { 0.0 };
    let max_index = 0.5 * (same_class + same_cluster);
    let ari = if max_index == expected {
        1.0
    } else {
        (together - expected) / (max_index - expected)
    };

    let purity = (0..b.len())
        .map(|j| table.counts.iter().map(|r| r[j]).max().unwrap_or(0))
        .sum::<usize>() as f64
        / n as f64;

    let mut entropy_bits = 0.0;
    for (j, &bj) in b.iter().enumerate() {
        let h: f64 = table
            .counts
            .iter()
            .map(|r| r[j])
            .filter(|&c| c > 0)
            .map(|c| {
                let p = c as f64 / bj as f64;
                -p * p.log2()
            })
            .sum();
        entropy_bits += bj as f64 / n as f64 * h;
    }
    let entropy = if a.len() > 1 {
        entropy_bits / (a.len() as f64).log2()
    } else {
        0.0
    };

    ExtendedMetrics {
        f_score,
        precision,
        recall,
        ari,
        purity,
        entropy,
        entropy_raw: entropy_bits,
    }
}

pub fn extended_metrics(truth: &[usize], pred: &[usize]) -> Result<ExtendedMetrics> {
    Ok(extended_from_table(&ContingencyTable::new(truth, pred)?))
}

/// Every metric in one flat record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub acc: f64,
    pub nmi: f64,
    pub f_score: f64,
    pub precision: f64,
    pub recall: f64,
    pub ari: f64,
    pub purity: f64,
    pub entropy: f64,
    pub entropy_raw: f64,
}

pub fn evaluate(truth: &[usize], pred: &[usize]) -> Result<MetricReport> {
    let table = ContingencyTable::new(truth, pred)?;
    let ext = extended_from_table(&table);
    Ok(MetricReport {
        acc: mapping_from_table(&table).matched as f64 / table.n as f64,
        nmi: nmi_from_table(&table),
        f_score: ext.f_score,
        precision: ext.precision,
        recall: ext.recall,
        ari: ext.ari,
        purity: ext.purity,
        entropy: ext.entropy,
        entropy_raw: ext.entropy_raw,
    })
}
