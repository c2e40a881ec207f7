//! PESA: ES, simulated annealing and PSO sharing a prioritized replay
//! buffer.
//!
//! Each period every member runs one inner loop of equal size. At the
//! period barrier all new evaluations enter the buffer, SA chains restart
//! from buffer draws, and ES and PSO swap their weakest members for buffer
//! draws.

mod buffer;
mod pso;

use std::ops::Range;

use serde::{Deserialize, Serialize};

pub use buffer::ReplayBuffer;
pub use pso::{move_particle, pso_step, update_bests, Particle, Pso, PsoConfig};

use crate::error::{Error, Result};
use crate::es::{Es, EsConfig};
use crate::eval::{Evaluator, Objective, RunOutcome};
use crate::psa::{Psa, PsaConfig};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PesaConfig {
    pub buffer_capacity: usize,
    pub alpha_priority: f64,
    pub max_samples: usize,
    pub es: EsConfig,
    pub psa: PsaConfig,
    pub pso: PsoConfig,
}

impl Default for PesaConfig {
    fn default() -> Self {
        PesaConfig {
            buffer_capacity: 300,
            alpha_priority: 1.0,
            max_samples: 20_000,
            es: EsConfig {
                mu: 10,
                lambda_pop: 100,
                ..EsConfig::default()
            },
            psa: PsaConfig {
                nchain: 10,
                chain_size: 10,
                ..PsaConfig::default()
            },
            pso: PsoConfig::default(),
        }
    }
}

impl PesaConfig {
    /// Inner-loop evaluations per member and period.
    pub fn period_size(&self) -> usize {
        self.es.lambda_pop
    }

    pub fn validate(&self) -> Result<()> {
        let sa = self.psa.nchain * self.psa.chain_size;
        let pso = self.pso.npar * self.pso.steps;
        if self.es.lambda_pop != sa || sa != pso {
            return Err(Error::Config(format!(
                "pesa: unequal inner loops (es {}, sa {sa}, pso {pso})",
                self.es.lambda_pop
            )));
        }
        self.es.validate()?;
        self.psa.validate()?;
        self.pso.validate()
    }
}

/// Which member produced a record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Member {
    Sa,
    Es,
    Pso,
}

pub struct PesaRun {
    pub outcome: RunOutcome,
    /// Worker ids used by each member.
    pub workers: [(Member, Range<usize>); 3],
    pub periods: usize,
}

impl PesaRun {
    pub fn member_of(&self, worker: usize) -> Option<Member> {
        self.workers.iter().find(|(_, r)| r.contains(&worker)).map(|(m, _)| *m)
    }
}

pub fn run_pesa(obj: &dyn Objective, cfg: &PesaConfig, seed: u64, workers: usize) -> Result<PesaRun> {
    cfg.validate()?;
    let bounds = obj.bounds().to_vec();
    let sa_range = 0..cfg.psa.nchain;
    let es_range = sa_range.end..sa_range.end + cfg.es.lambda_pop;
    let pso_range = es_range.end..es_range.end + cfg.pso.npar;

    let mut ev = Evaluator::new(obj, cfg.max_samples, workers)?;
    let mut sa = Psa::new(
        PsaConfig { max_samples: cfg.max_samples, ..cfg.psa.clone() },
        rng::stream(seed, 0).next_seed(),
        sa_range.start,
    )?;
    let mut es = Es::new(cfg.es.clone(), &bounds, rng::stream(seed, 1).next_seed(), es_range.start)?;
    let mut pso = Pso::new(cfg.pso.clone(), &bounds, rng::stream(seed, 2).next_seed(), pso_range.start)?;
    let mut buffer = ReplayBuffer::new(cfg.buffer_capacity, cfg.alpha_priority)?;
    let mut draw = rng::stream(seed, 3);
    let mut periods = 0;

    while !ev.exhausted() {
        let start = ev.used();
        if sa.chains.is_empty() || sa.temperature < cfg.psa.tmin {
            sa.warmup(&mut ev)?;
        } else {
            sa.segment(&mut ev)?;
        }
        es.generation(&mut ev)?;
        pso.period(&mut ev)?;
        periods += 1;

        buffer.extend(ev.records()[start..].iter().map(|r| (r.vector.clone(), r.objective)));
        if buffer.is_empty() || ev.exhausted() {
            continue;
        }
        let starts = buffer.sample(sa.chains.len(), &mut draw)?;
        sa.restart_from(starts.into_iter().map(|(x, f)| (x, -f)).collect());
        es.inject(buffer.sample(cfg.es.mu, &mut draw)?, &bounds);
        pso.inject(buffer.sample(cfg.pso.npar.div_ceil(4), &mut draw)?);
    }
    Ok(PesaRun {
        outcome: ev.finish(),
        workers: [(Member::Sa, sa_range), (Member::Es, es_range), (Member::Pso, pso_range)],
        periods,
    })
}

trait NextSeed {
    fn next_seed(self) -> u64;
}

impl NextSeed for rng::StreamRng {
    fn next_seed(mut self) -> u64 {
        rand::RngCore::next_u64(&mut self)
    }
}
