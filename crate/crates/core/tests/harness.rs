use std::fs;
use std::path::Path;

use lpopt::harness::{self, compare_scores, decode_vector, read_objectives, run_path, Algorithm, ExperimentConfig, RUN_HEADER};
use lpopt::stats::ScoreMatrix;
use lpopt::Error;

fn config(dir: &Path, body: &str) -> ExperimentConfig {
    let text = format!("[experiment]\nout = {:?}\n{body}", dir.display().to_string());
    ExperimentConfig::from_toml_str(&text).unwrap()
}

#[test]
fn one_run_logs_exactly_the_budget() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "scenario = '89-eighth'\nalgorithms = ['psa']\nseeds = [7]\nmax_samples = 1000\nworkers = 2\n");
    let runs = harness::run_experiment(&cfg, |_| {}).unwrap();
    assert_eq!(runs.len(), 1);
    let path = run_path(dir.path(), Algorithm::Psa, 7);
    let text = fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), RUN_HEADER.join(","));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 1000);
    let first: Vec<&str> = rows[0].split(',').collect();
    assert_eq!(&first[..4], &["psa-s7", "psa", "7", "0"]);
    let slots = lpopt::problem::scenarios::scenario("89-eighth").unwrap().n_slots();
    assert_eq!(decode_vector(first[15]).unwrap().len(), slots);
    assert!(first[7].parse::<f64>().unwrap() > 0.0, "cycle length logged");
    assert_eq!(read_objectives(&path).unwrap().len(), 1000);
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let body = "scenario = 'toy4'\nalgorithms = ['ppo', 'tabu', 'pesa']\nseeds = [1, 2]\nmax_samples = 600\nworkers = 3\n";
    for d in [a.path(), b.path()] {
        let cfg = config(d, body);
        harness::run_experiment(&cfg, |_| {}).unwrap();
        harness::compare(&cfg).unwrap();
    }
    for name in ["runs/ppo_seed1.csv", "runs/pesa_seed2.csv", "summary.csv", "curves.csv", "nemenyi.csv", "friedman.csv"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
}

#[test]
fn full_grid_emits_every_run_and_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "benchmark = { name = 'neg_sphere', dim = 6, lo = -5, hi = 5 }\nalgorithms = ['ppo', 'psa', 'tabu', 'es', 'pesa']\nseeds = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9]\nmax_samples = 400\nworkers = 1\n",
    );
    let runs = harness::run_experiment(&cfg, |_| {}).unwrap();
    assert_eq!(runs.len(), 50);
    assert_eq!(fs::read_dir(dir.path().join("runs")).unwrap().count(), 50);
    let report = harness::compare(&cfg).unwrap();
    let c = report.comparison.unwrap();
    assert_eq!(c.nemenyi.p.len(), 5);
    assert!((0..5).all(|i| c.nemenyi.p[i][i] == 1.0));
    assert_eq!(report.summary.len(), 5);
    assert_eq!(report.curves.len(), 5);
    for (_, g) in &report.curves {
        assert_eq!(g.bins.len(), 200);
        assert!(g.bins.windows(2).all(|w| w[1].max >= w[0].max));
    }
    let curves = fs::read_to_string(dir.path().join("curves.csv")).unwrap();
    assert_eq!(curves.lines().next().unwrap(), "algo,bin,mean,mean_sigma,max,max_sigma");
    assert_eq!(curves.lines().count(), 1 + 5 * 200);
    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(summary.lines().next().unwrap(), "algo,avg_max,final_sigma,max_reward,avg_reward");
    for f in ["summary.txt", "friedman.txt", "nemenyi.txt", "report.txt", "scores.csv"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
}

#[test]
fn missing_runs_are_listed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "scenario = 'toy4'\nalgorithms = ['es', 'psa']\nseeds = [1, 2]\nmax_samples = 300\nworkers = 1\n");
    let only_es = config(dir.path(), "scenario = 'toy4'\nalgorithms = ['es']\nseeds = [1, 2]\nmax_samples = 300\nworkers = 1\n");
    harness::run_experiment(&only_es, |_| {}).unwrap();
    match harness::compare(&cfg) {
        Err(Error::MissingRuns(m)) => assert_eq!(m, vec![("psa".to_string(), 1), ("psa".to_string(), 2)]),
        other => panic!("expected missing runs, got {other:?}"),
    }
}

#[test]
fn duplicated_algorithm_is_a_null_comparison() {
    let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![-(i as f64); 2]).collect();
    let c = compare_scores(ScoreMatrix::new(vec!["psa".into(), "psa'".into()], rows).unwrap(), 0.1).unwrap();
    assert_eq!(c.friedman.p_value, 1.0);
    assert!(c.flagged.is_empty());
}

#[test]
fn bad_configs_are_rejected_before_running() {
    let bad = [
        "scenario = 'toy4'\nalgorithms = ['sgd']\nseeds = [1]\n",
        "scenario = 'toy4'\nalgorithms = ['es']\nseeds = [1, 1]\n",
        "scenario = 'toy4'\ninstance = 'x.toml'\nalgorithms = ['es']\nseeds = [1]\n",
        "algorithms = ['es']\nseeds = [1]\n",
        "scenario = 'toy4'\nalgorithms = ['es']\nseeds = [1]\nworkers = 0\n",
        "scenario = 'toy4'\nalgorithms = ['es']\nseeds = [1]\nbudget = 3\n",
    ];
    for body in bad {
        assert!(ExperimentConfig::from_toml_str(&format!("[experiment]\n{body}")).is_err(), "{body}");
    }
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "instance = '/nonexistent/core.toml'\nalgorithms = ['es']\nseeds = [1]\n");
    assert!(harness::run_experiment(&cfg, |_| {}).is_err());
    assert!(!dir.path().join("runs").exists());
}

#[test]
fn algorithm_blocks_are_read() {
    let cfg = ExperimentConfig::from_toml_str(
        "[experiment]\nscenario = 'toy4'\nalgorithms = ['tabu', 'ppo']\nseeds = [3]\n[tabu]\ntenure = 9\nreinforce_best = 'softmax'\n[ppo]\nn_steps = 4\n",
    )
    .unwrap();
    assert_eq!(cfg.tabu.tenure, 9);
    assert_eq!(cfg.ppo.n_steps, 4);
    assert_eq!(cfg.experiment.max_samples, 20_000);
    assert_eq!(cfg.experiment.workers, 32);
    assert_eq!(cfg.experiment.alpha, 0.1);
}

#[test]
fn too_short_runs_cannot_be_binned() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "scenario = 'toy4'\nalgorithms = ['es', 'psa']\nseeds = [1, 2]\nmax_samples = 150\nworkers = 1\n");
    harness::run_experiment(&cfg, |_| {}).unwrap();
    assert!(matches!(harness::compare(&cfg), Err(Error::TooFewSamples { samples: 150, bins: 200 })));
}
