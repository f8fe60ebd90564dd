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


use std::fmt::Write as _;
use std::path::Path;
use std::process::{Command, Output};

use kergraph::synthetic::three_blobs;

fn kergraph(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kergraph"))
        .args(args)
        .env("KERGRAPH_THREADS", "1")
        .output()
        .unwrap()
}

fn blobs(dir: &Path) -> String {
    let (x, truth) = three_blobs(30, 6.0, 7).unwrap();
    let mut s = String::from("a,b,class\n");
    for (col, t) in x.values().column_iter().zip(&truth) {
        writeln!(s, "{},{},c{t}", col[0], col[1]).unwrap();
    }
    let p = dir.join("blobs.csv");
    std::fs::write(&p, s).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn cluster_writes_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let data = blobs(dir.path());
    let out = dir.path().join("run");
    let o = kergraph(&[
        "cluster", "--data", &data, "--header", "--label-col", "class", "--reg", "lowrank", "--alpha", "0.01",
        "--seed", "3", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["k"], 3);
    assert_eq!(report["solver"]["alpha"], 0.01);
    assert_eq!(report["solver"]["regularizer"], "lowrank");
    assert!(report["metrics"]["acc"].as_f64().unwrap() >= 0.95);
}

#[test]
fn build_kernels_and_eval() {
    let dir = tempfile::tempdir().unwrap();
    let data = blobs(dir.path());
    let out = dir.path().join("k");
    let o = kergraph(&["build-kernels", "--data", &data, "--header", "--label-col", "2", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("kernels.bin").exists());

    let truth = dir.path().join("t.txt");
    let pred = dir.path().join("p.txt");
    std::fs::write(&truth, "a\na\nb\nb\n").unwrap();
    std::fs::write(&pred, "1\n1\n0\n0\n").unwrap();
    let o = kergraph(&["eval", "--truth", truth.to_str().unwrap(), "--pred", pred.to_str().unwrap()]);
    assert!(o.status.success());
    let m: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(m["acc"], 1.0);
    assert_eq!(m["nmi"], 1.0);
}

#[test]
fn failures_exit_nonzero_with_a_message() {
    let o = kergraph(&["cluster", "--data", "/nonexistent/x.csv", "--k", "2"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
    let o = kergraph(&["cluster", "--reg", "dense"]);
    assert!(!o.status.success());
}
