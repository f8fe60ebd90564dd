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


// Scores a prediction against ground truth with every metric.

use kergraph::error::Result;
use kergraph::metrics::{accuracy, evaluate, nmi, optimal_mapping, ContingencyTable};

pub fn run_example() -> Result<()> {
    let truth = [0, 0, 0, 1, 1, 1, 2, 2, 2, 2];
    let pred = [2, 2, 1, 0, 0, 0, 1, 1, 1, 0];

    let table = ContingencyTable::new(&truth, &pred)?;
    println!("contingency {:?}", table.counts);
    let mapping = optimal_mapping(&truth, &pred)?;
    println!("cluster -> class {:?}, {} matched", mapping.pairs, mapping.matched);
    println!("acc {:.3}, nmi {:.3}", accuracy(&truth, &pred)?, nmi(&truth, &pred)?);

    let report = evaluate(&truth, &pred)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
