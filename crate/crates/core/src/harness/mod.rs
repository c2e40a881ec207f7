//! Experiment orchestration: seeded runs, CSV logs, curves and comparisons.

mod config;
mod io;
mod report;

use std::path::{Path, PathBuf};

pub use config::{Algorithm, BenchmarkSpec, ExperimentConfig, ExperimentSection, ProblemSource};
pub use io::{decode_vector, encode_vector, read_objectives, run_id, run_path, write_run, RUN_HEADER};
pub use report::{
    aggregate_generations, aligned, compare_scores, summary_row, summary_text, write_curves, write_summary, BinStat,
    Comparison, GenerationSummary, SummaryRow, BINS, SUMMARY_HEADER,
};

use crate::error::{Error, Result};
use crate::es::run_es;
use crate::eval::{Objective, RunOutcome};
use crate::pesa::run_pesa;
use crate::ppo::run_ppo;
use crate::psa::run_psa;
use crate::stats::ScoreMatrix;
use crate::tabu::run_tabu;

/// Runs one algorithm with the experiment's budget on `obj`.
pub fn run_algorithm(
    obj: &dyn Objective,
    algo: Algorithm,
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<RunOutcome> {
    let n = cfg.experiment.max_samples;
    let w = cfg.experiment.workers;
    Ok(match algo {
        Algorithm::Ppo => run_ppo(obj, &crate::ppo::PpoConfig { max_samples: n, ..cfg.ppo.clone() }, seed, w)?,
        Algorithm::Psa => run_psa(obj, &crate::psa::PsaConfig { max_samples: n, ..cfg.psa.clone() }, seed, w)?.outcome,
        Algorithm::Tabu => {
            run_tabu(obj, &crate::tabu::TsConfig { max_samples: n, ..cfg.tabu.clone() }, seed, w)?.outcome
        }
        Algorithm::Es => run_es(obj, &crate::es::EsConfig { max_samples: n, ..cfg.es.clone() }, seed, w)?,
        Algorithm::Pesa => {
            run_pesa(obj, &crate::pesa::PesaConfig { max_samples: n, ..cfg.pesa.clone() }, seed, w)?.outcome
        }
    })
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub algo: Algorithm,
    pub seed: u64,
    pub path: PathBuf,
    pub samples: usize,
    pub best_objective: f64,
    pub best_vector: Vec<i64>,
}

/// Every (algorithm, seed) pair of the config, one CSV each. The objective
/// is built and checked before the first run starts.
pub fn run_experiment(cfg: &ExperimentConfig, mut progress: impl FnMut(&RunSummary)) -> Result<Vec<RunSummary>> {
    cfg.validate()?;
    let obj = cfg.problem().build()?;
    let out = &cfg.experiment.out;
    let mut done = Vec::new();
    for &algo in &cfg.experiment.algorithms {
        for &seed in &cfg.experiment.seeds {
            let outcome = run_algorithm(obj.as_ref(), algo, cfg, seed)?;
            let path = run_path(out, algo, seed);
            write_run(&path, algo, seed, &outcome.records)?;
            let s = RunSummary {
                algo,
                seed,
                path,
                samples: outcome.records.len(),
                best_objective: outcome.best_objective,
                best_vector: outcome.best_vector,
            };
            progress(&s);
            done.push(s);
        }
    }
    Ok(done)
}

/// Objective streams per algorithm, in config order. Lists every absent run.
pub fn load_runs(cfg: &ExperimentConfig) -> Result<Vec<(Algorithm, Vec<Vec<f64>>)>> {
    let e = &cfg.experiment;
    let missing: Vec<(String, u64)> = e
        .algorithms
        .iter()
        .flat_map(|&a| e.seeds.iter().map(move |&s| (a, s)))
        .filter(|&(a, s)| !run_path(&e.out, a, s).is_file())
        .map(|(a, s)| (a.to_string(), s))
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingRuns(missing));
    }
    e.algorithms
        .iter()
        .map(|&a| {
            let runs = e.seeds.iter().map(|&s| read_objectives(&run_path(&e.out, a, s))).collect::<Result<_>>()?;
            Ok((a, runs))
        })
        .collect()
}

/// N seeds by k algorithms of best objectives.
pub fn score_matrix(runs: &[(Algorithm, Vec<Vec<f64>>)]) -> Result<ScoreMatrix> {
    let labels = runs.iter().map(|(a, _)| a.to_string()).collect();
    let n = runs.first().map_or(0, |(_, r)| r.len());
    let rows = (0..n)
        .map(|i| runs.iter().map(|(_, r)| r[i].iter().copied().fold(f64::NEG_INFINITY, f64::max)).collect())
        .collect();
    ScoreMatrix::new(labels, rows)
}

#[derive(Debug, Clone)]
pub struct Report {
    pub summary: Vec<SummaryRow>,
    pub curves: Vec<(String, GenerationSummary)>,
    /// Absent when fewer than two algorithms or seeds were run.
    pub comparison: Option<Comparison>,
}

impl Report {
    pub fn text(&self) -> String {
        let mut s = summary_text(&self.summary);
        if let Some(c) = &self.comparison {
            s.push('\n');
            s.push_str(&c.friedman_text());
            s.push('\n');
            s.push_str(&c.nemenyi_text());
        }
        s
    }
}

/// Reads the run logs and writes summary, curves, scores, Friedman and
/// Nemenyi tables into the output directory.
pub fn compare(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let runs = load_runs(cfg)?;
    let out = &cfg.experiment.out;
    let summary = runs
        .iter()
        .map(|(a, r)| summary_row(a.name(), r, BINS))
        .collect::<Result<Vec<_>>>()?;
    let curves = runs
        .iter()
        .map(|(a, r)| Ok((a.to_string(), aggregate_generations(r, BINS)?)))
        .collect::<Result<Vec<_>>>()?;
    write_summary(out, &summary)?;
    write_curves(out, &curves)?;
    let e = &cfg.experiment;
    let comparison = if e.algorithms.len() >= 2 && e.seeds.len() >= 2 {
        let c = compare_scores(score_matrix(&runs)?, e.alpha)?;
        c.write(out)?;
        Some(c)
    } else {
        None
    };
    let report = Report {
        summary,
        curves,
        comparison,
    };
    report::write_text(&out.join("report.txt"), &report.text())?;
    Ok(report)
}

/// Friedman and Nemenyi on a score CSV, written next to `out`.
pub fn stats_from_csv(path: &Path, alpha: f64, out: Option<&Path>) -> Result<Comparison> {
    let f = std::fs::File::open(path).map_err(io::io_err(path))?;
    let c = compare_scores(ScoreMatrix::from_csv(f)?, alpha)?;
    if let Some(out) = out {
        c.write(out)?;
    }
    Ok(c)
}
