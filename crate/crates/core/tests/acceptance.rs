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


mod common;

use std::time::Instant;

use common::{
    ari_from_pairs, central_gradient, l1, lagrangian_oracle, matched_by_enumeration, nmi_oracle,
    nuclear_oracle, pair_counts, random_bank, random_labels, rng, symmetric_matrix, uniform_matrix,
    LagrangianInputs,
};
use kergraph::data::{load_dataset, Dataset, DatasetSpec, LabelColumn};
use kergraph::grid::{grid_search, grid_search_in_order, GridContext, GridSpec};
use kergraph::kernel_bank::{build_standard_bank, KernelBank};
use kergraph::metrics::{accuracy, evaluate, nmi};
use kergraph::pipeline::{run_on_dataset, ExperimentConfig};
use kergraph::prox::{project_simplex, soft_threshold, svt};
use kergraph::solver::{solve, update_k, update_z, Regularizer, Solver, SolverConfig, SolverState};
use kergraph::spectral::{cluster_graph, ClusterOptions};
use kergraph::synthetic::three_blobs;
use kergraph::weights::{solve_simplex_qp, WeightQp};
use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn perturbation(r: &mut ChaCha8Rng, radius: f64) -> DMatrix<f64> {
    let p = uniform_matrix(r, 4, 4, -1.0, 1.0);
    let scale = radius * r.random::<f64>() / p.norm();
    p * scale
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut r = rng(101);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..50 {
        let d = uniform_matrix(&mut r, 4, 4, -1.0, 1.0);
        let tau = r.random_range(0.05..0.5);
        let soft_obj = |x: &DMatrix<f64>| tau * l1(x) + 0.5 * (x - &d).norm_squared();
        let svt_obj = |x: &DMatrix<f64>| tau * nuclear_oracle(x) + 0.5 * (x - &d).norm_squared();
        let xs = soft_threshold(&d, tau);
        let xn = svt(&d, tau).unwrap();
        let (bs, bn) = (soft_obj(&xs), svt_obj(&xn));
        for _ in 0..10_000 {
            let p = perturbation(&mut r, 0.1);
            worst = worst.max(bs - soft_obj(&(&xs + &p)));
            let p = perturbation(&mut r, 0.1);
            worst = worst.max(bn - svt_obj(&(&xn + &p)));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst < 1e-9 && secs < 5.0,
        format!("largest improvement {worst:.3e}, {secs:.2} s"),
    )
}

fn lagrangian_at(s: &SolverState, kernels: &[DMatrix<f64>], c: &SolverConfig) -> f64 {
    lagrangian_oracle(&LagrangianInputs {
        k: &s.k,
        z: &s.z,
        j: &s.j,
        w: &s.w,
        y1: &s.y1,
        y2: &s.y2,
        g: &s.g,
        kernels,
        alpha: c.alpha,
        beta: c.beta,
        gamma: c.gamma,
        mu: s.mu,
        low_rank: c.regularizer == Regularizer::LowRank,
    })
}

fn criterion_2() -> Outcome {
    let mut r = rng(102);
    let n = 6;
    let mut worst: f64 = 0.0;
    for trial in 0..20 {
        let bank = random_bank(&mut r, n, 3);
        let kernels: Vec<DMatrix<f64>> = bank.kernels().iter().map(|h| h.values().clone()).collect();
        let weights: Vec<f64> = (0..3).map(|_| r.random::<f64>()).collect();
        let mut s = SolverState {
            z: uniform_matrix(&mut r, n, n, -0.5, 0.5),
            k: symmetric_matrix(&mut r, n, 0.0, 1.0),
            j: uniform_matrix(&mut r, n, n, 0.0, 0.5),
            w: uniform_matrix(&mut r, n, n, 0.0, 1.0),
            g: project_simplex(&weights),
            y1: uniform_matrix(&mut r, n, n, -0.3, 0.3),
            y2: uniform_matrix(&mut r, n, n, -0.3, 0.3),
            mu: r.random_range(0.5..3.0),
            iter: 0,
        };
        let c = SolverConfig {
            alpha: r.random_range(0.01..0.5),
            beta: r.random_range(0.01..0.5),
            gamma: r.random_range(0.1..5.0),
            regularizer: if trial % 2 == 0 { Regularizer::Sparse } else { Regularizer::LowRank },
            ..SolverConfig::default()
        };
        s.z = update_z(&s.k, &s.j, &s.y1, s.mu).unwrap();
        let gz = central_gradient(
            |z| {
                let mut t = s.clone();
                t.z = z.clone();
                lagrangian_at(&t, &kernels, &c)
            },
            &s.z,
            1e-6,
        );
        s.k = update_k(&s.z, &s.w, &s.y2, &s.g, &bank, s.mu, c.gamma).unwrap();
        let gk = central_gradient(
            |k| {
                let mut t = s.clone();
                t.k = k.clone();
                lagrangian_at(&t, &kernels, &c)
            },
            &s.k,
            1e-6,
        );
        worst = worst.max(gz.amax()).max(gk.amax());
    }
    outcome(worst <= 1e-5, format!("largest gradient entry {worst:.3e}"))
}

fn random_qp(r: &mut ChaCha8Rng, dim: usize) -> WeightQp {
    let rank = r.random_range(1..=dim);
    let b = uniform_matrix(r, rank, dim, -1.0, 1.0);
    WeightQp {
        m: b.transpose() * b,
        a: DVector::from_fn(dim, |_, _| r.random_range(-2.0..2.0)),
        gamma: r.random_range(0.1..5.0),
    }
}

fn grid_min(qp: &WeightQp, steps: usize) -> f64 {
    let dim = qp.r();
    let mut best = f64::INFINITY;
    let mut counts = vec![0usize; dim];
    loop {
        let used: usize = counts[..dim - 1].iter().sum();
        if used <= steps {
            counts[dim - 1] = steps - used;
            let g = DVector::from_iterator(dim, counts.iter().map(|&c| c as f64 / steps as f64));
            best = best.min(qp.objective(&g));
        }
        let mut i = 0;
        while i < dim - 1 {
            counts[i] += 1;
            if counts[i] <= steps {
                break;
            }
            counts[i] = 0;
            i += 1;
        }
        if i == dim - 1 {
            return best;
        }
    }
}

fn criterion_3() -> Outcome {
    let mut r = rng(103);
    let (mut gap2, mut gap3) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for _ in 0..100 {
        let qp = random_qp(&mut r, 2);
        gap2 = gap2.max(solve_simplex_qp(&qp, &[0.5, 0.5]).objective - grid_min(&qp, 10_000));
        let qp = random_qp(&mut r, 3);
        gap3 = gap3.max(solve_simplex_qp(&qp, &[1.0 / 3.0; 3]).objective - grid_min(&qp, 100));
    }
    outcome(
        gap2 <= 1e-6 && gap3 <= 1e-3,
        format!("r = 2 gap {gap2:.3e}, r = 3 gap {gap3:.3e}"),
    )
}

fn feasible(s: &SolverState) -> bool {
    let nonneg = |m: &DMatrix<f64>| m.iter().all(|&v| v >= 0.0);
    nonneg(&s.z)
        && nonneg(&s.k)
        && nonneg(&s.j)
        && nonneg(&s.w)
        && s.g.iter().all(|&v| v >= 0.0)
        && (s.g.iter().sum::<f64>() - 1.0).abs() <= 1e-12
}

/// Returns the criterion 4 and criterion 5 outcomes, which share runs.
fn criteria_4_and_5() -> (Outcome, Outcome) {
    let mut ok4 = true;
    let mut violations = 0usize;
    let mut checked = 0usize;
    let mut notes = Vec::new();
    for seed in 0..5u64 {
        let (x, _) = three_blobs(90, 6.0, seed).unwrap();
        let bank = build_standard_bank(&x).unwrap();
        for reg in [Regularizer::Sparse, Regularizer::LowRank] {
            let config = SolverConfig {
                regularizer: reg,
                seed,
                ..SolverConfig::default()
            };
            let out = Solver::new(&bank, config.clone())
                .unwrap()
                .run_with(|s, _| {
                    checked += 1;
                    violations += usize::from(!feasible(s));
                })
                .unwrap();
            let last = out.trace.last().unwrap();
            let default_ok = out.converged && last.res_jz.max(last.res_wk) <= 1e-4 * (1.0 + out.k.norm());

            let mut solver = Solver::new(&bank, config.clone()).unwrap();
            let mut reached = None;
            while solver.state().iter < 300 {
                solver.step().unwrap();
                let s = solver.state();
                checked += 1;
                violations += usize::from(!feasible(s));
                let (rz, rk) = s.residuals();
                if rz < 1e-4 && rk < 1e-4 {
                    reached = Some(s.iter);
                    break;
                }
            }
            ok4 &= default_ok && reached.is_some();
            notes.push(format!(
                "{seed}/{reg:?}: stop {} abs<1e-4 at {}",
                out.iterations,
                reached.map_or("never".to_string(), |i| i.to_string())
            ));
        }
    }
    (
        outcome(ok4, notes.join(", ")),
        outcome(
            violations == 0 && checked > 0,
            format!("{violations} violations over {checked} iterates"),
        ),
    )
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let mut good = 0;
    let mut notes = Vec::new();
    for seed in 0..5u64 {
        let (features, truth) = three_blobs(150, 6.0, 1000 + seed).unwrap();
        let data = Dataset {
            features,
            labels: Some(truth),
            class_names: vec!["0".into(), "1".into(), "2".into()],
        };
        let mut config = ExperimentConfig::default();
        config.solver.seed = seed;
        let m = run_on_dataset(&data, &config).unwrap().report.metrics.unwrap();
        good += usize::from(m.acc >= 0.95 && m.nmi >= 0.90);
        notes.push(format!("acc {:.3} nmi {:.3}", m.acc, m.nmi));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        good >= 4 && secs < 60.0,
        format!("{good}/5 seeds pass, {secs:.1} s ({})", notes.join("; ")),
    )
}

fn criterion_7() -> Outcome {
    let mut r = rng(107);
    let mut acc_mismatch = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let n = r.random_range(2..=30);
        let (ct, cp) = (r.random_range(1..=4), r.random_range(1..=4));
        let truth = random_labels(&mut r, n, ct);
        let pred = random_labels(&mut r, n, cp);
        let exact = matched_by_enumeration(&truth, &pred) as f64 / n as f64;
        acc_mismatch += usize::from(accuracy(&truth, &pred).unwrap() != exact);
        let m = evaluate(&truth, &pred).unwrap();
        let pc = pair_counts(&truth, &pred);
        let p = if pc.tp + pc.fp > 0.0 { pc.tp / (pc.tp + pc.fp) } else { 1.0 };
        let rc = if pc.tp + pc.fn_ > 0.0 { pc.tp / (pc.tp + pc.fn_) } else { 1.0 };
        let f = if p + rc > 0.0 { 2.0 * p * rc / (p + rc) } else { 0.0 };
        for (got, want) in [
            (m.nmi, nmi_oracle(&truth, &pred)),
            (m.ari, ari_from_pairs(&pc)),
            (m.precision, p),
            (m.recall, rc),
            (m.f_score, f),
        ] {
            worst = worst.max((got - want).abs());
        }
    }
    outcome(
        acc_mismatch == 0 && worst <= 1e-12,
        format!("{acc_mismatch} accuracy mismatches, largest pair-metric error {worst:.3e}"),
    )
}

/// Runs on a user-supplied file when `KERGRAPH_YALE_CSV` is set.
fn criterion_8() -> Outcome {
    let Ok(path) = std::env::var("KERGRAPH_YALE_CSV") else {
        return outcome(true, "skipped, KERGRAPH_YALE_CSV not set".into());
    };
    let label_col = std::env::var("KERGRAPH_YALE_LABEL_COL").ok().map(|s| s.parse::<LabelColumn>().unwrap());
    let raw = std::fs::read_to_string(&path).unwrap();
    let width = raw.lines().next().map_or(0, |l| l.split(',').count());
    let spec = DatasetSpec {
        path: path.into(),
        label_col: Some(label_col.unwrap_or(LabelColumn::Index(width.saturating_sub(1)))),
        ..DatasetSpec::default()
    };
    let data = match load_dataset(&spec) {
        Ok(d) => d,
        Err(e) => return outcome(false, format!("could not load: {e}")),
    };
    let mut config = ExperimentConfig::default();
    config.solver.regularizer = Regularizer::LowRank;
    match run_on_dataset(&data, &config) {
        Ok(out) => {
            let m = out.report.metrics.unwrap();
            let acc = 100.0 * m.acc;
            outcome(
                (acc - 66.06).abs() <= 5.0,
                format!("acc {acc:.2}% (target 66.06 +/- 5), nmi {:.2}% (reference 64.57)", 100.0 * m.nmi),
            )
        }
        Err(e) => outcome(false, format!("run failed: {e}")),
    }
}

fn criterion_9() -> Outcome {
    let (x, truth) = three_blobs(30, 6.0, 9).unwrap();
    let bank = build_standard_bank(&x).unwrap();
    let ctx = GridContext {
        bank: &bank,
        truth: &truth,
        base: SolverConfig::default(),
        k: 3,
        cluster: ClusterOptions::default(),
    };
    let grid = GridSpec::default();
    let first = grid_search(&ctx, &grid, None).unwrap();
    let replay = grid_search(&ctx, &grid, None).unwrap();
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.shuffle(&mut rng(109));
    let shuffled = grid_search_in_order(&ctx, &grid, None, &order).unwrap();
    let failures = first.iter().filter(|r| r.error.is_some()).count();
    outcome(
        first.len() == 72 && first == replay && first == shuffled,
        format!(
            "{} rows, replay {}, shuffled {}, {failures} failed tuples",
            first.len(),
            if first == replay { "identical" } else { "differs" },
            if first == shuffled { "identical" } else { "differs" },
        ),
    )
}

fn learned_graph(bank: &KernelBank, seed: u64) -> DMatrix<f64> {
    let config = SolverConfig {
        seed,
        ..SolverConfig::default()
    };
    solve(bank, &config).unwrap().z
}

fn criterion_10() -> Outcome {
    let mut r = rng(110);
    let opts = ClusterOptions::default();
    let mut changed = 0;
    let mut trials = 0;
    for seed in 0..10u64 {
        let n = 3 * r.random_range(8..14);
        let (x, _) = three_blobs(n, r.random_range(2.0..6.0), 2000 + seed).unwrap();
        let z = learned_graph(&build_standard_bank(&x).unwrap(), seed);
        let base = cluster_graph(&z, 3, &opts).unwrap().labels;
        for c in [1e-3, 0.37, 3.0, 1e4] {
            trials += 1;
            changed += usize::from(cluster_graph(&(&z * c), 3, &opts).unwrap().labels != base);
        }
    }
    outcome(changed == 0, format!("{changed} of {trials} scaled graphs changed labels"))
}

#[test]
fn acceptance() {
    let (c4, c5) = criteria_4_and_5();
    let results = [
        (1, criterion_1()),
        (2, criterion_2()),
        (3, criterion_3()),
        (4, c4),
        (5, c5),
        (6, criterion_6()),
        (7, criterion_7()),
        (8, criterion_8()),
        (9, criterion_9()),
        (10, criterion_10()),
    ];
    let mut failed = Vec::new();
    for (id, o) in &results {
        let gating = *id != 8;
        let verdict = match (o.pass, gating) {
            (true, _) => "PASS",
            (false, true) => "FAIL",
            (false, false) => "FAIL (non-gating)",
        };
        println!("criterion {id}: {verdict} ({})", o.detail);
        if gating && !o.pass {
            failed.push(*id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

#[test]
fn nmi_oracle_agrees_on_a_hand_example() {
    let truth = [0, 0, 1, 1];
    let pred = [0, 1, 1, 1];
    assert!((nmi(&truth, &pred).unwrap() - nmi_oracle(&truth, &pred)).abs() <= 1e-15);
}
