use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::es::EsConfig;
use crate::eval::{Bounds, Objective};
use crate::pesa::PesaConfig;
use crate::ppo::PpoConfig;
use crate::problem::{scenarios, ProblemInstance};
use crate::psa::PsaConfig;
use crate::surrogate::{benchmark_objective, CoreObjective};
use crate::tabu::TsConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Ppo,
    Psa,
    Tabu,
    Es,
    Pesa,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [Algorithm::Ppo, Algorithm::Psa, Algorithm::Tabu, Algorithm::Es, Algorithm::Pesa];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Ppo => "ppo",
            Algorithm::Psa => "psa",
            Algorithm::Tabu => "tabu",
            Algorithm::Es => "es",
            Algorithm::Pesa => "pesa",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::UnknownAlgorithm(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkSpec {
    pub name: String,
    pub dim: usize,
    pub lo: i64,
    pub hi: i64,
}

/// Where the objective comes from. Exactly one must be set.
#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSource {
    Scenario(String),
    Instance(PathBuf),
    Benchmark(BenchmarkSpec),
}

impl ProblemSource {
    /// Scenario names are tried first, then instance files.
    pub fn parse(s: &str) -> Self {
        if scenarios::SCENARIOS.contains(&s) {
            ProblemSource::Scenario(s.to_string())
        } else {
            ProblemSource::Instance(PathBuf::from(s))
        }
    }

    pub fn build(&self) -> Result<Box<dyn Objective>> {
        Ok(match self {
            ProblemSource::Scenario(name) => Box::new(CoreObjective::new(scenarios::scenario(name)?)),
            ProblemSource::Instance(path) => Box::new(CoreObjective::new(ProblemInstance::load(path)?)),
            ProblemSource::Benchmark(b) => {
                if b.dim == 0 || b.lo > b.hi {
                    return Err(Error::Config(format!("benchmark {}: empty box", b.name)));
                }
                Box::new(benchmark_objective(&b.name, b.dim, Bounds::new(b.lo, b.hi), None)?)
            }
        })
    }

    pub fn label(&self) -> String {
        match self {
            ProblemSource::Scenario(n) => n.clone(),
            ProblemSource::Instance(p) => p.display().to_string(),
            ProblemSource::Benchmark(b) => format!("{}-{}", b.name, b.dim),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    #[serde(default)]
    pub scenario: Option<String>,
    #[serde(default)]
    pub instance: Option<PathBuf>,
    #[serde(default)]
    pub benchmark: Option<BenchmarkSpec>,
    pub algorithms: Vec<Algorithm>,
    pub seeds: Vec<u64>,
    #[serde(default = "default_max_samples")]
    pub max_samples: usize,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
}

fn default_max_samples() -> usize {
    20_000
}
fn default_workers() -> usize {
    32
}
fn default_out() -> PathBuf {
    PathBuf::from("runs")
}
fn default_alpha() -> f64 {
    0.1
}

/// The experiment file: an `[experiment]` table plus optional per-algorithm
/// tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub ppo: PpoConfig,
    #[serde(default)]
    pub psa: PsaConfig,
    #[serde(default)]
    pub tabu: TsConfig,
    #[serde(default)]
    pub es: EsConfig,
    #[serde(default)]
    pub pesa: PesaConfig,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads a file; a relative instance path resolves against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::from_toml_str(&text)?;
        if let (Some(inst), Some(dir)) = (cfg.experiment.instance.as_mut(), path.parent()) {
            if inst.is_relative() {
                *inst = dir.join(&*inst);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let e = &self.experiment;
        let sources = [e.scenario.is_some(), e.instance.is_some(), e.benchmark.is_some()];
        if sources.iter().filter(|s| **s).count() != 1 {
            return Err(Error::Config("exactly one of scenario, instance or benchmark must be set".into()));
        }
        if e.algorithms.is_empty() || e.seeds.is_empty() {
            return Err(Error::Config("algorithms and seeds must be non-empty".into()));
        }
        if e.seeds.iter().collect::<BTreeSet<_>>().len() != e.seeds.len() {
            return Err(Error::Config("seeds must be distinct".into()));
        }
        if e.algorithms.iter().collect::<BTreeSet<_>>().len() != e.algorithms.len() {
            return Err(Error::Config("algorithms must be distinct".into()));
        }
        if e.workers == 0 || e.max_samples == 0 {
            return Err(Error::Config("workers and max_samples must be at least 1".into()));
        }
        if !(e.alpha > 0.0 && e.alpha < 1.0) {
            return Err(Error::Config("alpha must lie in (0, 1)".into()));
        }
        for a in &e.algorithms {
            match a {
                Algorithm::Ppo => self.ppo.validate()?,
                Algorithm::Psa => self.psa.validate()?,
                Algorithm::Tabu => self.tabu.validate()?,
                Algorithm::Es => self.es.validate()?,
                Algorithm::Pesa => self.pesa.validate()?,
            }
        }
        Ok(())
    }

    pub fn problem(&self) -> ProblemSource {
        let e = &self.experiment;
        if let Some(s) = &e.scenario {
            ProblemSource::Scenario(s.clone())
        } else if let Some(p) = &e.instance {
            ProblemSource::Instance(p.clone())
        } else {
            ProblemSource::Benchmark(e.benchmark.clone().expect("validated"))
        }
    }
}
