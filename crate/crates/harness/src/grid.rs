//! Cells and grids.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use bandit_mdp::learners::Algorithm;
use bandit_mdp::mdp::{optimal_policy, validate};
use bandit_mdp::LayeredMdp;
use rayon::prelude::*;
use serde::Serialize;

use crate::output::{emit_svg, write_csv};
use crate::{ExperimentConfig, HarnessError, RegretTrace};

/// Runs one learner for `config.episodes` episodes and prices every episode
/// with the exact value of the policy it played.
pub fn run_cell(
    config: &ExperimentConfig,
    mdp: &LayeredMdp,
    algorithm: &Algorithm,
    seed: u64,
) -> Result<RegretTrace, HarnessError> {
    let report = validate(mdp);
    if !report.is_ok() {
        return Err(HarnessError::Shape(format!("instance fails validation: {report}")));
    }
    if *algorithm == Algorithm::Ordered && !mdp.is_ordered() {
        return Err(HarnessError::Shape(
            "the ordered learner needs an instance with a known action ordering".into(),
        ));
    }
    let started = Instant::now();
    let run = algorithm.run(mdp, config.episodes, seed)?;
    let wall_s = started.elapsed().as_secs_f64();
    let (_, opt) = optimal_policy(mdp);
    let scale = if config.normalize_by_k {
        1.0
    } else {
        1.0 / mdp.meta.value_scale
    };
    Ok(RegretTrace::from_run(
        mdp,
        &run,
        opt,
        config.stride(),
        scale,
        algorithm.tag(),
        seed,
        wall_s,
    ))
}

#[derive(Debug, Clone, Serialize)]
pub struct CellFailure {
    pub instance: String,
    pub algorithm: String,
    pub seed: u64,
    pub error: String,
}

/// Mean learner cost of one (instance, algorithm) pair across seeds.
#[derive(Debug, Clone, Serialize)]
pub struct RuntimeRow {
    pub instance: String,
    pub algorithm: String,
    pub seeds: usize,
    pub mean_wall_s: f64,
    pub us_per_episode: f64,
    pub mean_final_regret: f64,
}

#[derive(Debug, Default)]
pub struct GridResult {
    /// `(instance label, trace)` for every successful cell.
    pub traces: Vec<(String, RegretTrace)>,
    pub failures: Vec<CellFailure>,
    pub runtime: Vec<RuntimeRow>,
}

impl GridResult {
    pub fn traces_for<'a>(&'a self, instance: &'a str) -> impl Iterator<Item = &'a RegretTrace> + 'a {
        self.traces.iter().filter(move |(l, _)| l == instance).map(|(_, t)| t)
    }

    pub fn mean_final_regret(&self, instance: &str, algorithm: &str) -> Option<f64> {
        self.runtime
            .iter()
            .find(|r| r.instance == instance && r.algorithm == algorithm)
            .map(|r| r.mean_final_regret)
    }
}

/// Runs every (instance, algorithm, seed) cell, then writes per-cell CSVs,
/// `summary.csv`, one SVG panel per instance, `runtime.md`/`runtime.csv` and
/// `metadata.json` under `config.out`. Failed cells are reported, not fatal.
pub fn run_grid(config: &ExperimentConfig) -> Result<GridResult, HarnessError> {
    config.validate()?;
    let mut result = GridResult::default();
    let mut built = Vec::new();
    for inst in &config.instances {
        let label = inst.label();
        match inst.build() {
            Ok(mdp) => built.push((label, mdp)),
            Err(e) => {
                for alg in &config.algorithms {
                    for &seed in &config.seeds {
                        result.failures.push(CellFailure {
                            instance: label.clone(),
                            algorithm: alg.tag().into(),
                            seed,
                            error: e.to_string(),
                        });
                    }
                }
            }
        }
    }
    let cells: Vec<(usize, Algorithm, u64)> = (0..built.len())
        .flat_map(|i| {
            config
                .algorithms
                .iter()
                .flat_map(move |a| config.seeds.iter().map(move |&s| (i, *a, s)))
        })
        .collect();
    let exec = |&(i, alg, seed): &(usize, Algorithm, u64)| (i, alg, seed, run_cell(config, &built[i].1, &alg, seed));
    let outcomes: Vec<_> = if config.parallel {
        cells.par_iter().map(exec).collect()
    } else {
        cells.iter().map(exec).collect()
    };
    for (i, alg, seed, outcome) in outcomes {
        match outcome {
            Ok(trace) => result.traces.push((built[i].0.clone(), trace)),
            Err(e) => result.failures.push(CellFailure {
                instance: built[i].0.clone(),
                algorithm: alg.tag().into(),
                seed,
                error: e.to_string(),
            }),
        }
    }
    for (label, _) in &built {
        for alg in &config.algorithms {
            let ts: Vec<&RegretTrace> = result
                .traces_for(label)
                .filter(|t| t.algorithm == alg.tag())
                .collect();
            if ts.is_empty() {
                continue;
            }
            let n = ts.len() as f64;
            result.runtime.push(RuntimeRow {
                instance: label.clone(),
                algorithm: alg.tag().into(),
                seeds: ts.len(),
                mean_wall_s: ts.iter().map(|t| t.wall_s).sum::<f64>() / n,
                us_per_episode: ts.iter().map(|t| t.wall_per_episode()).sum::<f64>() / n * 1e6,
                mean_final_regret: ts.iter().map(|t| t.final_regret()).sum::<f64>() / n,
            });
        }
    }
    write_outputs(config, &built, &result)?;
    Ok(result)
}

fn write_outputs(config: &ExperimentConfig, built: &[(String, LayeredMdp)], result: &GridResult) -> Result<(), HarnessError> {
    let out = &config.out;
    std::fs::create_dir_all(out).map_err(|e| HarnessError::io(out, e))?;
    let y_label = if config.normalize_by_k {
        "cumulative regret / k"
    } else {
        "cumulative regret"
    };
    for (label, _) in built {
        let dir = out.join(label);
        std::fs::create_dir_all(&dir).map_err(|e| HarnessError::io(&dir, e))?;
        let traces: Vec<RegretTrace> = result.traces_for(label).cloned().collect();
        for t in &traces {
            write_csv(t, &dir.join(format!("{}-seed{}.csv", t.algorithm, t.seed)))?;
        }
        if !traces.is_empty() {
            emit_svg(&out.join(format!("{label}.svg")), label, y_label, &traces)?;
        }
    }

    let summary = out.join("summary.csv");
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(&summary)
        .map_err(|e| csv_error(&summary, e))?;
    w.write_record(["instance", "algorithm", "seed", "episodes", "final_cum_regret", "wall_s", "us_per_episode"])
        .map_err(|e| csv_error(&summary, e))?;
    for (label, t) in &result.traces {
        w.write_record([
            label.clone(),
            t.algorithm.clone(),
            t.seed.to_string(),
            t.total_episodes.to_string(),
            t.final_regret().to_string(),
            t.wall_s.to_string(),
            (t.wall_per_episode() * 1e6).to_string(),
        ])
        .map_err(|e| csv_error(&summary, e))?;
    }
    w.flush().map_err(|e| HarnessError::io(&summary, e))?;

    let runtime_csv = out.join("runtime.csv");
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(&runtime_csv)
        .map_err(|e| csv_error(&runtime_csv, e))?;
    for row in &result.runtime {
        w.serialize(row).map_err(|e| csv_error(&runtime_csv, e))?;
    }
    w.flush().map_err(|e| HarnessError::io(&runtime_csv, e))?;

    let md = out.join("runtime.md");
    std::fs::write(&md, runtime_markdown(config, built, result)).map_err(|e| HarnessError::io(&md, e))?;

    let meta = out.join("metadata.json");
    let doc = serde_json::json!({
        "config": config,
        "seeds_per_curve": config.seeds.len(),
        "stride": config.stride(),
        "failures": result.failures,
    });
    std::fs::write(&meta, serde_json::to_string_pretty(&doc).expect("metadata serializes"))
        .map_err(|e| HarnessError::io(&meta, e))
}

fn csv_error(path: &Path, e: csv::Error) -> HarnessError {
    HarnessError::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

/// Algorithms as rows, instances as columns, mean µs per episode in each cell.
fn runtime_markdown(config: &ExperimentConfig, built: &[(String, LayeredMdp)], result: &GridResult) -> String {
    let mut s = String::from("| algorithm |");
    for (label, _) in built {
        let _ = write!(s, " {label} |");
    }
    s.push_str("\n|---|");
    for _ in built {
        s.push_str("---:|");
    }
    s.push('\n');
    for alg in &config.algorithms {
        let _ = write!(s, "| {} |", alg.tag());
        for (label, _) in built {
            match result
                .runtime
                .iter()
                .find(|r| &r.instance == label && r.algorithm == alg.tag())
            {
                Some(r) => {
                    let _ = write!(s, " {:.2} |", r.us_per_episode);
                }
                None => s.push_str(" – |"),
            }
        }
        s.push('\n');
    }
    s.push_str("\nMean learner wall time per episode in microseconds, regret accounting excluded.\n");
    s
}
