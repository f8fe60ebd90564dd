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

//! Binary matrix cache.
//!
//! Layout: one JSON header line `{"n", "r", "specs", "dataset_hash"}`
//! terminated by `\n`, followed by `r` payloads of `n * n` little-endian
//! `f64` values in row-major order. Reads reproduce the written bits exactly.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel_bank::{KernelBank, KernelMatrix, KernelSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheHeader {
    pub n: usize,
    pub r: usize,
    /// One spec per payload, or empty for matrices that are not kernels
    /// (e.g. a learned graph).
    pub specs: Vec<KernelSpec>,
    pub dataset_hash: String,
}

pub fn write_matrices(path: &Path, header: &CacheHeader, matrices: &[&DMatrix<f64>]) -> Result<()> {
    if matrices.len() != header.r {
        return Err(Error::DimensionMismatch {
            context: "cache payload count",
            expected: header.r,
            found: matrices.len(),
        });
    }
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut w, header)?;
    w.write_all(b"\n")?;
    for m in matrices {
        if m.nrows() != header.n || m.ncols() != header.n {
            return Err(Error::DimensionMismatch {
                context: "cache payload size",
                expected: header.n,
                found: m.nrows().max(m.ncols()),
            });
        }
        for i in 0..header.n {
            for j in 0..header.n {
                w.write_all(&m[(i, j)].to_le_bytes())?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrices(path: &Path) -> Result<(CacheHeader, Vec<DMatrix<f64>>)> {
    let malformed = |message: String| Error::Cache {
        path: path.to_path_buf(),
        message,
    };
    let mut reader = BufReader::new(File::open(path)?);
    let mut line = String::new();
    reader.read_line(&mut line)?;
    if !line.ends_with('\n') {
        return Err(malformed("missing header line".into()));
    }
    let header: CacheHeader = serde_json::from_str(line.trim_end())
        .map_err(|e| malformed(format!("bad header: {e}")))?;
    if !header.specs.is_empty() && header.specs.len() != header.r {
        return Err(malformed(format!(
            "header lists {} specs for {} payloads",
            header.specs.len(),
            header.r
        )));
    }

    let n = header.n;
    let mut buf = vec![0u8; n * n * 8];
    let mut out = Vec::with_capacity(header.r);
    for k in 0..header.r {
        reader
            .read_exact(&mut buf)
            .map_err(|e| malformed(format!("payload {k} truncated: {e}")))?;
        let mut values = buf
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")));
        out.push(DMatrix::from_row_iterator(n, n, &mut values));
    }
    let mut rest = Vec::new();
    reader.read_to_end(&mut rest)?;
    if !rest.is_empty() {
        return Err(malformed(format!("{} trailing bytes", rest.len())));
    }
    Ok((header, out))
}

pub fn save_bank(path: &Path, bank: &KernelBank, dataset_hash: &str) -> Result<()> {
    let header = CacheHeader {
        n: bank.n(),
        r: bank.r(),
        specs: bank.specs(),
        dataset_hash: dataset_hash.to_string(),
    };
    let mats: Vec<&DMatrix<f64>> = bank.kernels().iter().map(KernelMatrix::values).collect();
    write_matrices(path, &header, &mats)
}

/// Loads a cached bank. Members are re-normalized, which is the identity on
/// matrices that were normalized when written.
pub fn load_bank(path: &Path) -> Result<(CacheHeader, KernelBank)> {
    let (header, mats) = read_matrices(path)?;
    if header.specs.len() != header.r {
        return Err(Error::Cache {
            path: path.to_path_buf(),
            message: "kernel cache must name one spec per payload".into(),
        });
    }
    let raw = mats
        .into_iter()
        .zip(&header.specs)
        .map(|(m, s)| KernelMatrix::new(m, s.clone()))
        .collect::<Result<Vec<_>>>()?;
    let bank = KernelBank::from_raw(raw)?;
    Ok((header, bank))
}
