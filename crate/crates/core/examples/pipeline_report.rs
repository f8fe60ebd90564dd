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


// The file-driven pipeline: a labelled CSV goes in, a report directory
// comes out, and a second run reuses the kernel cache.

use std::fmt::Write as _;

use kergraph::data::{DatasetSpec, LabelColumn};
use kergraph::error::Result;
use kergraph::pipeline::{read_graph, read_report, run_experiment, ExperimentConfig};
use kergraph::synthetic::three_blobs;

pub fn run_example() -> Result<()> {
    let dir = tempfile::tempdir()?;
    let (x, truth) = three_blobs(36, 6.0, 4)?;
    let mut csv = String::from("f1,f2,class\n");
    for (s, t) in x.values().column_iter().zip(&truth) {
        writeln!(csv, "{},{},blob{t}", s[0], s[1]).expect("writing to a string");
    }
    let data = dir.path().join("blobs.csv");
    std::fs::write(&data, csv)?;

    let config = ExperimentConfig {
        dataset: DatasetSpec {
            path: data,
            header: true,
            label_col: Some(LabelColumn::Name("class".into())),
            ..DatasetSpec::default()
        },
        out_dir: Some(dir.path().join("run")),
        kernel_cache: Some(dir.path().join("kernels.bin")),
        ..ExperimentConfig::default()
    };
    println!("{}", serde_json::to_string(&config)?);

    let cold = run_experiment(&config)?;
    let warm = run_experiment(&config)?;
    assert_eq!(cold.report, warm.report);
    let m = cold.report.metrics.expect("labels were given");
    println!("acc {:.3}, nmi {:.3}, g {:?}", m.acc, m.nmi, cold.report.g);

    let run = dir.path().join("run");
    assert_eq!(read_report(&run.join("report.json"))?, cold.report);
    assert_eq!(read_graph(&run.join("z.bin"))?, cold.z);
    for entry in std::fs::read_dir(&run)? {
        println!("wrote {}", entry?.file_name().to_string_lossy());
    }
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
