use bandit_mdp::learners::{Algorithm, LearnerRun};
use bandit_mdp::mdp::{optimal_policy, policy_value};
use bandit_mdp::Policy;
use bandit_mdp_harness::{policy_values, run_cell, run_grid, ExperimentConfig, InstanceRef, RegretTrace};

fn prophet(h: usize, k: usize, a: usize) -> InstanceRef {
    InstanceRef::ProphetUniform {
        horizon: h,
        capacity: k,
        num_values: a,
        pricing: false,
    }
}

fn config(out: &std::path::Path, algorithms: Vec<Algorithm>, episodes: u64, seeds: Vec<u64>) -> ExperimentConfig {
    ExperimentConfig {
        instances: vec![prophet(4, 2, 3)],
        algorithms,
        episodes,
        seeds,
        out: out.to_path_buf(),
        normalize_by_k: false,
        stride: Some(1),
        parallel: false,
    }
}

#[test]
fn optimal_policy_has_zero_regret() {
    let mdp = prophet(5, 2, 4).build().unwrap();
    let (p, opt) = optimal_policy(&mdp);
    let mut run = LearnerRun::new();
    run.record(&p, 1000);
    let trace = RegretTrace::from_run(&mdp, &run, opt, 1, 1.0, "fixed", 0, 0.0);
    assert_eq!(trace.final_regret(), 0.0);
    assert!(trace.points.iter().all(|pt| pt.instant_regret == 0.0));
}

#[test]
fn fixed_policy_regret_is_linear() {
    let mdp = prophet(5, 2, 4).build().unwrap();
    let (_, opt) = optimal_policy(&mdp);
    let p = Policy::constant(5, mdp.width(), 0);
    let gap = opt - policy_value(&mdp, &p);
    assert!(gap > 0.0);
    let mut run = LearnerRun::new();
    run.record(&p, 777);
    let trace = RegretTrace::from_run(&mdp, &run, opt, 1, 1.0, "fixed", 0, 0.0);
    assert!((trace.final_regret() - 777.0 * gap).abs() < 1e-9);
    assert_eq!(trace.points.len(), 777);
}

#[test]
fn cumulative_regret_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), vec![Algorithm::ExpRef], 3000, vec![4]);
    let mdp = cfg.instances[0].build().unwrap();
    let trace = run_cell(&cfg, &mdp, &Algorithm::ExpRef, 4).unwrap();
    let run = Algorithm::ExpRef.run(&mdp, 3000, 4).unwrap();
    let (_, opt) = optimal_policy(&mdp);
    let values = policy_values(&mdp, &run);
    let played: f64 = run.segments().iter().map(|s| s.len as f64 * values[s.policy]).sum();
    let scale = 1.0 / mdp.meta.value_scale;
    let expected = (3000.0 * opt - played) * scale;
    assert!((trace.final_regret() - expected).abs() < 1e-6 * expected.abs().max(1.0));
    let summed: f64 = trace.points.iter().map(|p| p.instant_regret).sum();
    assert!((summed - expected).abs() < 1e-6 * expected.abs().max(1.0));
}

#[test]
fn stride_does_not_change_recorded_values() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path(), vec![Algorithm::ExpRef], 2000, vec![1]);
    let mdp = cfg.instances[0].build().unwrap();
    let fine = run_cell(&cfg, &mdp, &Algorithm::ExpRef, 1).unwrap();
    cfg.stride = Some(7);
    let coarse = run_cell(&cfg, &mdp, &Algorithm::ExpRef, 1).unwrap();
    for p in &coarse.points {
        assert_eq!(fine.regret_at(p.episode), Some(p.cum_regret));
    }
    assert_eq!(coarse.points.last().unwrap().episode, 2000);
    assert_eq!(fine.final_regret(), coarse.final_regret());
}

#[test]
fn seeds_reproduce() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), vec![Algorithm::parse("ucbvi").unwrap()], 500, vec![3]);
    let mdp = cfg.instances[0].build().unwrap();
    let alg = cfg.algorithms[0];
    let a = run_cell(&cfg, &mdp, &alg, 3).unwrap();
    let b = run_cell(&cfg, &mdp, &alg, 3).unwrap();
    assert_eq!(a.points, b.points);
    let c = run_cell(&cfg, &mdp, &alg, 4).unwrap();
    assert_ne!(a.points, c.points);
}

#[test]
fn single_cell_grid_matches_run_cell() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), vec![Algorithm::Ordered], 1500, vec![2]);
    let result = run_grid(&cfg).unwrap();
    assert!(result.failures.is_empty());
    assert_eq!(result.traces.len(), 1);
    let mdp = cfg.instances[0].build().unwrap();
    let direct = run_cell(&cfg, &mdp, &Algorithm::Ordered, 2).unwrap();
    assert_eq!(result.traces[0].1.points, direct.points);
    let label = cfg.instances[0].label();
    assert_eq!(result.mean_final_regret(&label, "ordered"), Some(direct.final_regret()));
}

#[test]
fn grid_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), vec![Algorithm::ExpRef, Algorithm::Ordered], 400, vec![0, 1]);
    let result = run_grid(&cfg).unwrap();
    assert_eq!(result.traces.len(), 4);
    assert_eq!(result.runtime.len(), 2);
    let label = cfg.instances[0].label();
    for file in ["summary.csv", "runtime.md", "runtime.csv", "metadata.json"] {
        assert!(dir.path().join(file).is_file(), "missing {file}");
    }
    let svg = std::fs::read_to_string(dir.path().join(format!("{label}.svg"))).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    assert!(dir.path().join(&label).join("expref-seed1.csv").is_file());
    let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 5);
}

#[test]
fn failing_cells_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path(), vec![Algorithm::ExpRef], 100, vec![0]);
    cfg.instances.push(InstanceRef::File {
        path: dir.path().join("missing.json"),
    });
    let result = run_grid(&cfg).unwrap();
    assert_eq!(result.traces.len(), 1);
    assert_eq!(result.failures.len(), 1);
}

#[test]
fn normalize_by_k_rescales() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path(), vec![Algorithm::ExpRef], 600, vec![0]);
    let mdp = cfg.instances[0].build().unwrap();
    let raw = run_cell(&cfg, &mdp, &Algorithm::ExpRef, 0).unwrap();
    cfg.normalize_by_k = true;
    let norm = run_cell(&cfg, &mdp, &Algorithm::ExpRef, 0).unwrap();
    let k = 2.0;
    assert!((raw.final_regret() / k - norm.final_regret()).abs() < 1e-9 * raw.final_regret().max(1.0));
}
