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


//! Dataset ingestion from dense or sparse-triplet CSV files.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel_bank::FeatureMatrix;
use crate::metrics::LabelVector;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataFormat {
    /// One sample per row, comma separated.
    #[default]
    Dense,
    /// `row,col,value` lines with zero-based sample and feature indices.
    Sparse,
}

/// Selects the label column of a dense file, by header name or zero-based
/// index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelColumn {
    Index(usize),
    Name(String),
}

impl FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(s.to_string()),
        })
    }
}

impl fmt::Display for LabelColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelColumn::Index(i) => write!(f, "{i}"),
            LabelColumn::Name(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DatasetSpec {
    pub path: PathBuf,
    pub format: DataFormat,
    /// Whether the first line is a header.
    pub header: bool,
    /// Label column of a dense file.
    pub label_col: Option<LabelColumn>,
    /// Separate label file, one label per line. Used by the sparse format,
    /// and by dense files without a label column.
    pub labels_path: Option<PathBuf>,
}

/// Features plus optional ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: FeatureMatrix,
    /// Canonical class indices `0..c`.
    pub labels: Option<Vec<usize>>,
    /// Original class names, indexed by canonical class.
    pub class_names: Vec<String>,
}

impl Dataset {
    pub fn n_samples(&self) -> usize {
        self.features.n_samples()
    }

    pub fn n_classes(&self) -> Option<usize> {
        self.labels.as_ref().map(|_| self.class_names.len())
    }
}

pub fn load_dataset(spec: &DatasetSpec) -> Result<Dataset> {
    let file = File::open(&spec.path)?;
    let mut ds = match spec.format {
        DataFormat::Dense => parse_dense(file, spec.header, spec.label_col.as_ref())?,
        DataFormat::Sparse => {
            if spec.label_col.is_some() {
                return Err(Error::InvalidConfig(
                    "sparse files carry no label column; use labels_path".into(),
                ));
            }
            Dataset {
                features: parse_sparse(file, spec.header)?,
                labels: None,
                class_names: Vec::new(),
            }
        }
    };
    if let Some(path) = &spec.labels_path {
        if ds.labels.is_some() {
            return Err(Error::InvalidConfig(
                "labels given both as a column and as a separate file".into(),
            ));
        }
        let raw = read_raw_labels(path)?;
        if raw.len() != ds.n_samples() {
            return Err(Error::LengthMismatch {
                truth: raw.len(),
                pred: ds.n_samples(),
            });
        }
        let (labels, names) = canonical_labels(&raw);
        ds.labels = Some(labels);
        ds.class_names = names;
    }
    Ok(ds)
}

/// Parses a dense CSV with one sample per row. Line numbers in errors are
/// one-based and count the header.
pub fn parse_dense<R: Read>(reader: R, header: bool, label_col: Option<&LabelColumn>) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = rdr.records();

    let mut names: Option<Vec<String>> = None;
    if header {
        match records.next() {
            Some(rec) => names = Some(rec?.iter().map(str::to_string).collect()),
            None => return Err(empty_file()),
        }
    }

    let mut label_idx: Option<usize> = None;
    let mut width: Option<usize> = names.as_ref().map(Vec::len);
    if let Some(col) = label_col {
        label_idx = Some(match (col, &names) {
            (LabelColumn::Name(name), Some(h)) => h
                .iter()
                .position(|c| c == name)
                .ok_or_else(|| Error::MissingLabelColumn(name.clone()))?,
            (LabelColumn::Name(name), None) => {
                return Err(Error::MissingLabelColumn(format!("{name} (file has no header)")))
            }
            (LabelColumn::Index(i), _) => *i,
        });
    }

    let mut samples: Vec<Vec<f64>> = Vec::new();
    let mut raw_labels: Vec<String> = Vec::new();
    for rec in records {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        let expected = *width.get_or_insert(rec.len());
        if rec.len() != expected {
            return Err(Error::RaggedRows {
                line,
                expected,
                found: rec.len(),
            });
        }
        if let Some(li) = label_idx {
            if li >= rec.len() {
                return Err(Error::MissingLabelColumn(format!(
                    "index {li} (rows have {} fields)",
                    rec.len()
                )));
            }
        }
        let mut row = Vec::with_capacity(rec.len());
        for (c, field) in rec.iter().enumerate() {
            if Some(c) == label_idx {
                raw_labels.push(field.to_string());
                continue;
            }
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                line,
                message: format!("field {} is not a number: `{field}`", c + 1),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line,
                    message: format!("field {} is not finite: `{field}`", c + 1),
                });
            }
            row.push(v);
        }
        samples.push(row);
    }
    if samples.is_empty() {
        return Err(empty_file());
    }
    if samples[0].is_empty() {
        return Err(Error::InvalidInput("no feature columns besides the label".into()));
    }
    let features = FeatureMatrix::from_samples(&samples)?;
    let (labels, class_names) = if label_idx.is_some() {
        let (l, n) = canonical_labels(&raw_labels);
        (Some(l), n)
    } else {
        (None, Vec::new())
    };
    Ok(Dataset {
        features,
        labels,
        class_names,
    })
}

/// Parses `row,col,value` triplets into an `m x n` feature matrix, where
/// `n` and `m` are one past the largest sample and feature index.
/// Repeated coordinates are summed.
pub fn parse_sparse<R: Read>(reader: R, header: bool) -> Result<FeatureMatrix> {
    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let text = line.trim();
        if (header && i == 0) || text.is_empty() {
            continue;
        }
        let fields: Vec<&str> = text.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(Error::RaggedRows {
                line: line_no,
                expected: 3,
                found: fields.len(),
            });
        }
        let bad = |what: &str, f: &str| Error::Parse {
            line: line_no,
            message: format!("{what} is not valid: `{f}`"),
        };
        let row: usize = fields[0].parse().map_err(|_| bad("row index", fields[0]))?;
        let col: usize = fields[1].parse().map_err(|_| bad("column index", fields[1]))?;
        let value: f64 = fields[2].parse().map_err(|_| bad("value", fields[2]))?;
        if !value.is_finite() {
            return Err(bad("value", fields[2]));
        }
        triplets.push((row, col, value));
    }
    if triplets.is_empty() {
        return Err(empty_file());
    }
    let n = triplets.iter().map(|t| t.0).max().unwrap_or(0) + 1;
    let m = triplets.iter().map(|t| t.1).max().unwrap_or(0) + 1;
    let mut x = DMatrix::zeros(m, n);
    for (row, col, value) in triplets {
        x[(col, row)] += value;
    }
    FeatureMatrix::new(x)
}

/// Reads one label per non-empty line.
pub fn read_raw_labels(path: &Path) -> Result<Vec<String>> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for line in reader.lines() {
        let line = line?;
        let t = line.trim();
        if !t.is_empty() {
            out.push(t.to_string());
        }
    }
    if out.is_empty() {
        return Err(empty_file());
    }
    Ok(out)
}

/// Reads a label file and renumbers it to `0..c`.
pub fn read_labels(path: &Path) -> Result<Vec<usize>> {
    Ok(canonical_labels(&read_raw_labels(path)?).0)
}

/// Renumbers labels to `0..c`. Integer labels keep their numeric order;
/// anything else is ordered as text.
pub fn canonical_labels(raw: &[String]) -> (Vec<usize>, Vec<String>) {
    let ints: Option<Vec<i64>> = raw.iter().map(|s| s.parse().ok()).collect();
    match ints {
        Some(v) => {
            let (lv, names) = LabelVector::canonicalize(&v);
            (lv.labels().to_vec(), names.iter().map(i64::to_string).collect())
        }
        None => {
            let (lv, names) = LabelVector::canonicalize(raw);
            (lv.labels().to_vec(), names)
        }
    }
}

fn empty_file() -> Error {
    Error::Parse {
        line: 1,
        message: "no data rows".into(),
    }
}
