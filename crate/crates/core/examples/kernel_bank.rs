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


// Builds the standard twelve-kernel bank on synthetic blobs, inspects it,
// and round-trips it through the binary cache.

use kergraph::cache::{load_bank, save_bank};
use kergraph::error::Result;
use kergraph::kernel_bank::{build_kernel, build_standard_bank, normalize_kernel, KernelSpec};
use kergraph::synthetic::three_blobs;

pub fn run_example() -> Result<()> {
    let (x, _) = three_blobs(30, 6.0, 7)?;
    let bank = build_standard_bank(&x)?;
    println!("n = {}, r = {}", bank.n(), bank.r());
    for h in bank.kernels() {
        println!("  {:<24} max = {}", h.spec().to_string(), h.max_entry());
    }
    for rec in bank.clip_log() {
        println!("  clipped {} entries of {}", rec.clipped_entries, rec.spec);
    }

    let poly: KernelSpec = "poly:1:3".parse()?;
    let raw = build_kernel(&x, &poly)?;
    let h = normalize_kernel(&raw)?;
    println!("{poly}: raw max {:.3}, normalized max {}", raw.max_entry(), h.max_entry());

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("kernels.bin");
    save_bank(&path, &bank, &x.content_hash())?;
    let (header, loaded) = load_bank(&path)?;
    assert_eq!(header.dataset_hash, x.content_hash());
    assert_eq!(loaded.kernels()[3].values(), bank.kernels()[3].values());
    println!("cache round trip ok ({} bytes)", std::fs::metadata(&path)?.len());
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
