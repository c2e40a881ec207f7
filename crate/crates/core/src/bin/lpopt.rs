use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use lpopt::harness::{self, encode_vector, Algorithm, ExperimentConfig, ProblemSource};
use lpopt::surrogate::{brute_force, enumerate};
use lpopt::{Error, Result};

#[derive(Parser)]
#[command(name = "lpopt", version, about = "Loading-pattern optimization experiments")]
struct Cli {
    /// Experiment file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overrides the experiment file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Run a single seed instead of the configured list.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true)]
    max_samples: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured algorithm and seed, one CSV per run.
    Run {
        /// Restrict to these algorithms.
        #[arg(long, value_delimiter = ',')]
        algo: Vec<Algorithm>,
    },
    /// Summary, curves and rank tests over finished runs.
    Compare,
    /// Friedman and Nemenyi tests on a score CSV (header = labels).
    Stats {
        scores: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        alpha: f64,
    },
    /// Exhaustive optimum of a small problem.
    Oracle {
        /// Scenario name or instance file.
        #[arg(long, default_value = "toy4")]
        problem: String,
        /// Write every point and its objective to this CSV.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Print the full text report, regenerating the tables.
    Report,
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("--config is required for this command".into()))?;
    let mut cfg = ExperimentConfig::load(path)?;
    let e = &mut cfg.experiment;
    if let Some(o) = &cli.out {
        e.out = o.clone();
    }
    if let Some(s) = cli.seed {
        e.seeds = vec![s];
    }
    if let Some(w) = cli.workers {
        e.workers = w;
    }
    if let Some(n) = cli.max_samples {
        e.max_samples = n;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn oracle(problem: &str, dump: Option<&PathBuf>) -> Result<()> {
    let obj = ProblemSource::parse(problem).build()?;
    let best = brute_force(obj.as_ref())?;
    println!("points    {}", best.count);
    println!("optimum   {}", best.objective);
    println!("vector    {}", encode_vector(&best.best));
    if let Some(path) = dump {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::Config(e.to_string()))?;
        let mut res = Ok(());
        w.write_record(["vector", "objective", "feasible"]).map_err(|e| Error::Config(e.to_string()))?;
        enumerate(obj.as_ref(), |x, ev| {
            if res.is_ok() {
                res = w.write_record([encode_vector(x), ev.objective.to_string(), u8::from(ev.feasible).to_string()]);
            }
        })?;
        res.and_then(|_| w.flush().map_err(csv::Error::from)).map_err(|e| Error::Config(e.to_string()))?;
        println!("wrote     {}", path.display());
    }
    Ok(())
}

fn main_inner(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Run { algo } => {
            let mut cfg = load_config(&cli)?;
            if !algo.is_empty() {
                cfg.experiment.algorithms.retain(|a| algo.contains(a));
                cfg.validate()?;
            }
            harness::run_experiment(&cfg, |r| {
                println!(
                    "{:<5} seed {:<6} {:>7} samples  best {:>12.4}  -> {}",
                    r.algo,
                    r.seed,
                    r.samples,
                    r.best_objective,
                    r.path.display()
                );
            })?;
        }
        Command::Compare => {
            let cfg = load_config(&cli)?;
            let report = harness::compare(&cfg)?;
            if let Some(c) = &report.comparison {
                println!("friedman chi2 = {:.3}, p = {}", c.friedman.statistic, lpopt::stats::format_p(c.friedman.p_value));
                for (a, b, p) in &c.flagged {
                    println!("  {a} vs {b}: p = {}", lpopt::stats::format_p(*p));
                }
            }
            println!("tables written to {}", cfg.experiment.out.display());
        }
        Command::Stats { scores, alpha } => {
            let c = harness::stats_from_csv(scores, *alpha, cli.out.as_deref())?;
            print!("{}\n{}", c.friedman_text(), c.nemenyi_text());
        }
        Command::Oracle { problem, dump } => oracle(problem, dump.as_ref())?,
        Command::Report => {
            let cfg = load_config(&cli)?;
            print!("{}", harness::compare(&cfg)?.text());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
